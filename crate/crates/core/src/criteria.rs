//! Closed-form comparison functions, existence thresholds and the condition region traces.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Profile, SurfaceModel, SurfaceStats};

/// Geodesic curvature of the circle of radius `r` in the model plane of curvature `k`.
pub fn ct(k: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() || !k.is_finite() {
        return Err(Error::DomainError(format!("ct needs r > 0, got r = {r}")));
    }
    if k > 0.0 {
        let sk = k.sqrt();
        if r * sk >= PI {
            return Err(Error::DomainError(format!("r sqrt(k) = {} >= pi", r * sk)));
        }
        Ok(sk / (r * sk).tan())
    } else if k == 0.0 {
        Ok(1.0 / r)
    } else {
        let sk = (-k).sqrt();
        Ok(sk / (r * sk).tanh())
    }
}

/// Radius of the circle of geodesic curvature `c` in the model plane of curvature `k`.
pub fn r0(c: f64, k: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() || !k.is_finite() {
        return Err(Error::DomainError(format!("r0 needs c > 0, got c = {c}")));
    }
    if k <= -c * c {
        return Err(Error::DomainError(format!("r0 needs k > -c^2, got k = {k}, c = {c}")));
    }
    if k > 0.0 {
        let sk = k.sqrt();
        Ok(1.0f64.atan2(c / sk) / sk)
    } else if k == 0.0 {
        Ok(1.0 / c)
    } else {
        let sk = (-k).sqrt();
        let y = c / sk;
        Ok(0.5 * ((y + 1.0) / (y - 1.0)).ln() / sk)
    }
}

fn acot_pos(x: f64) -> f64 {
    1.0f64.atan2(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub name: String,
    /// Signed distance to the threshold; `None` when the criterion does not apply.
    pub margin: Option<f64>,
    pub satisfied: bool,
    pub note: String,
}

impl CriterionVerdict {
    fn new(name: &str, margin: Option<f64>, satisfied: bool, note: &str) -> Self {
        CriterionVerdict { name: name.into(), margin, satisfied, note: note.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub min_k: f64,
    pub max_k: f64,
    pub inj: f64,
    pub c: f64,
    pub area: Option<f64>,
    pub inj_certified: bool,
    pub verdicts: Vec<CriterionVerdict>,
    pub area_upper_bound: Option<f64>,
    pub width_lower_bound: Option<f64>,
}

impl CriteriaReport {
    pub fn get(&self, name: &str) -> Option<&CriterionVerdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

/// Evaluates every existence criterion for prescribed curvature `c`.
pub fn evaluate_criteria(stats: &SurfaceStats, c: f64) -> CriteriaReport {
    evaluate_criteria_with_area(stats, c, None)
}

pub fn evaluate_criteria_with_area(stats: &SurfaceStats, c: f64, area: Option<f64>) -> CriteriaReport {
    let min_k = stats.min_k.value;
    let max_k = stats.max_k.value;
    let inj = stats.inj.value;
    let mut verdicts = Vec::new();

    let (threshold, note) = match ct(min_k, inj) {
        Ok(t) => (t, ""),
        Err(_) => (0.0, "inj sqrt(minK) >= pi: threshold vacuous"),
    };
    let m = c - threshold;
    verdicts.push(CriterionVerdict::new("general_existence", Some(m), m > 0.0, note));

    let m1 = c * c + min_k;
    verdicts.push(CriterionVerdict::new("config1_excluded", Some(m1), m1 >= 0.0, ""));

    let m2 = c * c - (PI * PI / (4.0 * inj * inj) - min_k);
    verdicts.push(CriterionVerdict::new("config2_excluded_by_stability", Some(m2), m2 >= 0.0, ""));

    match r0(c, min_k) {
        Ok(r) => {
            let md = inj - r;
            verdicts.push(CriterionVerdict::new(
                "config2_excluded_by_loop_length",
                Some(md),
                md > 0.0,
                "loop length window [2 inj, 2 R0(c, minK)] is empty when positive",
            ));
        }
        Err(_) => verdicts.push(CriterionVerdict::new(
            "config2_excluded_by_loop_length",
            None,
            false,
            "minK <= -c^2",
        )),
    }

    let mut area_upper_bound = None;
    let mut width_lower_bound = None;
    if min_k > 0.0 && max_k > 0.0 {
        let mn = min_k / max_k;
        let cn = c / max_k.sqrt();
        let pc = positive_curvature_conditions(mn, cn);
        verdicts.push(CriterionVerdict::new(
            "positive_curvature_geometric",
            Some(pc.geometric_margin),
            pc.geometric_margin > 0.0,
            "normalized to maxK = 1",
        ));
        verdicts.push(CriterionVerdict::new(
            "positive_curvature_width",
            Some(pc.width_margin),
            pc.width_margin >= 0.0,
            "normalized to maxK = 1",
        ));
        let either = pc.geometric_margin > 0.0 || pc.width_margin >= 0.0;
        let best = pc.geometric_margin.max(pc.width_margin);
        verdicts.push(CriterionVerdict::new("positive_curvature_either", Some(best), either, ""));
        let gb = gauss_bonnet_bounds(area.unwrap_or(0.0), 0.0, min_k, c);
        area_upper_bound = Some(gb.area_upper_bound);
        width_lower_bound = Some(gauss_bonnet_bounds(0.0, 0.0, mn, cn).width_lower_bound);
        if let Some(a) = area {
            let mg = gb.area_upper_bound - a;
            verdicts.push(CriterionVerdict::new("gauss_bonnet_area", Some(mg), mg >= 0.0, ""));
        }
    } else {
        for name in ["positive_curvature_geometric", "positive_curvature_width", "positive_curvature_either"] {
            verdicts.push(CriterionVerdict::new(name, None, false, "requires minK > 0"));
        }
    }

    CriteriaReport {
        min_k,
        max_k,
        inj,
        c,
        area,
        inj_certified: stats.inj.certified,
        verdicts,
        area_upper_bound,
        width_lower_bound,
    }
}

/// Margins of the two positive-curvature conditions at normalized `(m, c)`, `maxK = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositiveConditions {
    /// `c - sqrt(m) cot(pi sqrt(m))`; positive means the geometric condition holds.
    pub geometric_margin: f64,
    /// `2 pi - max{...}`; nonnegative means the width condition holds.
    pub width_margin: f64,
}

pub fn positive_curvature_conditions(m: f64, c: f64) -> PositiveConditions {
    let geometric_margin = if m >= 1.0 { c } else { c - upper_branch(m) };
    let width_margin = 2.0 * PI - width_term(m, c);
    PositiveConditions { geometric_margin, width_margin }
}

/// `c = sqrt(m) cot(pi sqrt(m))`.
pub fn upper_branch(m: f64) -> f64 {
    let sm = m.sqrt();
    sm / (PI * sm).tan()
}

/// `max{2 pi c(1-2c)/m, pi c(1-2c)/m + acot(c/sqrt m)/sqrt m}`.
pub fn width_term(m: f64, c: f64) -> f64 {
    let sm = m.sqrt();
    let q = c * (1.0 - 2.0 * c) / m;
    (2.0 * PI * q).max(PI * q + acot_pos(c / sm) / sm)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::RootBracketFailure { lo, hi });
    }
    while hi - lo > 1e-12 * (1.0 + lo.abs()) {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Corner of the condition region: both positive-curvature conditions are active.
pub fn region_corner() -> Result<(f64, f64)> {
    let c = bisect(0.1, 0.24, |c| {
        let m = c * (1.0 - 2.0 * c);
        upper_branch(m) - c
    })?;
    Ok((c * (1.0 - 2.0 * c), c))
}

/// Lower-branch value of c at normalized minimum curvature `m` in `[1/16, m_corner]`.
pub fn lower_branch(m: f64) -> Result<f64> {
    let (_, c_corner) = region_corner()?;
    if (m - 1.0 / 16.0).abs() < 1e-14 {
        return Ok(0.0);
    }
    bisect(0.0, c_corner, |c| width_term(m, c) - 2.0 * PI)
}

/// Lower-branch value of m at curvature `c` in `[0, c_corner]`.
pub fn lower_branch_min_k(c: f64) -> Result<f64> {
    let (m_corner, c_corner) = region_corner()?;
    if !(0.0..=c_corner).contains(&c) {
        return Err(Error::DomainError(format!("lower branch needs c in [0, {c_corner}], got {c}")));
    }
    if c == c_corner {
        return Ok(m_corner);
    }
    bisect(0.05, m_corner, |m| width_term(m, c) - 2.0 * PI)
}

/// Value of m where the lower branch meets `c = 0`.
pub fn lower_branch_intercept() -> Result<f64> {
    bisect(0.01, 0.2, |m| width_term(m, 0.0) - 2.0 * PI)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { points: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub min_k: f64,
    pub c_upper: f64,
    pub c_lower: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundaryTrace {
    pub points: Vec<TracePoint>,
    pub corner: (f64, f64),
    pub intercept: f64,
    /// The simplified sufficient threshold on m, reported next to the corner.
    pub simplified_threshold: f64,
}

/// Traces the upper and lower branches of the positive-curvature condition region.
///
/// Samples are `grid.points` values of m evenly spaced in `(0, m_corner]`, merged with the
/// lower branch at `grid.points` values of c evenly spaced in `[0, c_corner)`, which keeps
/// the steep part of the lower branch near the corner resolved.
pub fn figure1_region(grid: &GridConfig) -> Result<RegionBoundaryTrace> {
    let corner = region_corner()?;
    let intercept = lower_branch_intercept()?;
    let n = grid.points.max(2);
    let mut points = Vec::with_capacity(2 * n);
    for i in 1..=n {
        let m = corner.0 * i as f64 / n as f64;
        let c_lower = if i == n {
            Some(corner.1)
        } else if m >= intercept {
            Some(lower_branch(m)?)
        } else {
            None
        };
        points.push(TracePoint { min_k: m, c_upper: upper_branch(m), c_lower });
    }
    for i in 0..n {
        let c = corner.1 * i as f64 / n as f64;
        let m = if i == 0 { intercept } else { lower_branch_min_k(c)? };
        points.push(TracePoint { min_k: m, c_upper: upper_branch(m), c_lower: Some(c) });
    }
    points.sort_by(|a, b| a.min_k.total_cmp(&b.min_k));
    Ok(RegionBoundaryTrace { points, corner, intercept, simplified_threshold: 0.125 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure2Point {
    pub inj: f64,
    pub c_blue: f64,
    pub c_red: f64,
}

/// `c = coth(inj)` for minK = -1.
pub fn figure2_blue(inj: f64) -> f64 {
    1.0 / inj.tanh()
}

/// `c = (pi/2) inj^-1 (1 + inj^2/(2 pi))`.
pub fn figure2_red(inj: f64) -> f64 {
    PI / 2.0 / inj * (1.0 + inj * inj / (2.0 * PI))
}

/// Samples both threshold curves on `inj` in `[0.1, 10]`, geometrically spaced.
pub fn figure2_curves(grid: &GridConfig) -> Vec<Figure2Point> {
    let n = grid.points.max(2);
    (0..n)
        .map(|i| {
            let inj = 0.1 * 100f64.powf(i as f64 / (n - 1) as f64);
            Figure2Point { inj, c_blue: figure2_blue(inj), c_red: figure2_red(inj) }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussBonnetBounds {
    pub area_upper_bound: f64,
    pub width_lower_bound: f64,
    pub area_violated: bool,
    /// Loop lengths each exceed 2 pi under the normalization; this is their sum bound.
    pub loop_length_lower_bound: f64,
    pub boundary_length_consistent: bool,
}

/// Area and width bounds for a Config-2 region in positive curvature.
pub fn gauss_bonnet_bounds(area: f64, length: f64, min_k: f64, c: f64) -> GaussBonnetBounds {
    let area_upper_bound = 2.0 * PI * (1.0 - 2.0 * c) / min_k;
    let width_lower_bound = 4.0 * PI - 2.0 * PI * c * (1.0 - 2.0 * c) / min_k;
    GaussBonnetBounds {
        area_upper_bound,
        width_lower_bound,
        area_violated: area > area_upper_bound,
        loop_length_lower_bound: 4.0 * PI,
        boundary_length_consistent: length == 0.0 || length > 4.0 * PI,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaEstimate {
    pub isoperimetric_constant: f64,
    pub eta: f64,
    pub estimated: bool,
}

/// Isoperimetric constant c1 and the area scale `eta = min{c1^2/c^2, area/2}`.
pub fn isoperimetric_eta(surface: &SurfaceModel, c: f64) -> EtaEstimate {
    let area = surface.total_area();
    let disk = 2.0 * PI.sqrt();
    let (c1, estimated) = match surface {
        SurfaceModel::FlatTorus(t) => {
            let strip = 2.0 * t.shortest_vector().norm() / (area / 2.0).sqrt();
            (disk.min(strip), false)
        }
        SurfaceModel::Revolution(r) => match r.profile {
            Profile::Sphere { .. } => ((2.0 * PI).sqrt(), false),
            Profile::CappedCylinder { .. } => {
                let strip = 2.0 * 2.0 * PI / (area / 2.0).sqrt();
                ((2.0 * PI).sqrt().min(strip), true)
            }
        },
        SurfaceModel::ConformalTorus(t) => {
            let samples = t.samples();
            let umin = samples.iter().cloned().fold(f64::INFINITY, f64::min);
            let umax = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lat = t.lattice();
            let strip = 2.0 * lat.shortest_vector().norm() / (lat.area() / 2.0).sqrt();
            (0.5 * (umin - umax).exp() * disk.min(strip), true)
        }
    };
    EtaEstimate { isoperimetric_constant: c1, eta: (c1 * c1 / (c * c)).min(area / 2.0), estimated }
}

/// Cap-profile ratio `L / sqrt(A)` for a cap of area `a` on a sphere of radius `radius`.
pub fn sphere_cap_ratio(radius: f64, a: f64) -> f64 {
    (4.0 * PI - a / (radius * radius)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Estimate, FlatTorus};
    use proptest::prelude::*;

    fn stats(min_k: f64, max_k: f64, inj: f64) -> SurfaceStats {
        let e = |v| Estimate { value: v, certified: true };
        SurfaceStats { min_k: e(min_k), max_k: e(max_k), inj: e(inj), area: e(10.0) }
    }

    #[test]
    fn ct_examples() {
        assert_eq!(ct(0.0, 2.0).unwrap(), 0.5);
        assert!((ct(1.0, PI / 4.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((ct(-1.0, 1.0).unwrap() - 1.3130).abs() < 1e-4);
        assert!(matches!(ct(1.0, PI), Err(Error::DomainError(_))));
    }

    #[test]
    fn r0_examples() {
        assert_eq!(r0(2.0, 0.0).unwrap(), 0.5);
        assert!((r0(1.0, 1.0).unwrap() - PI / 4.0).abs() < 1e-10);
        assert!(matches!(r0(1.0, -1.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn ct_continuous_at_zero() {
        for i in 0..100 {
            let r = 0.1 + 9.9 * i as f64 / 99.0;
            assert!((ct(1e-8, r).unwrap() - 1.0 / r).abs() < 1e-6);
            assert!((ct(-1e-8, r).unwrap() - 1.0 / r).abs() < 1e-6);
        }
    }

    #[test]
    fn ct_monotone_on_grid() {
        for &k in &[-2.0, -0.5, 0.0, 0.3, 1.0] {
            let mut prev = f64::INFINITY;
            for i in 1..200 {
                let r = i as f64 * 0.015;
                if let Ok(v) = ct(k, r) {
                    assert!(v < prev);
                    prev = v;
                }
            }
        }
        for i in 1..50 {
            let r = 0.05 * i as f64;
            let mut prev = f64::INFINITY;
            for j in 0..80 {
                let k = -2.0 + 0.05 * j as f64;
                if let Ok(v) = ct(k, r) {
                    assert!(v < prev);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn flat_torus_general_criterion() {
        let r = evaluate_criteria(&stats(0.0, 0.0, 1.0), 1.5);
        let v = r.get("general_existence").unwrap();
        assert!(v.satisfied);
        assert!((v.margin.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_threshold_tends_to_one() {
        let r = evaluate_criteria(&stats(-1.0, -1.0, 10.0), 1.0);
        let v = r.get("general_existence").unwrap();
        assert!(!v.satisfied);
        assert!(v.margin.unwrap() < 0.0 && v.margin.unwrap() > -1e-8);
    }

    #[test]
    fn positive_curvature_first_condition() {
        assert!((upper_branch(0.02) - 0.2962).abs() < 1e-3);
        let r = evaluate_criteria(&stats(0.02, 1.0, PI), 0.35);
        assert!(r.get("positive_curvature_geometric").unwrap().satisfied);
        assert!(r.get("positive_curvature_either").unwrap().satisfied);
        for v in &r.verdicts {
            if let Some(m) = v.margin {
                assert!(m.is_finite());
            }
        }
    }

    #[test]
    fn figure1_points() {
        assert!((upper_branch(0.1) - 0.205981).abs() < 1e-3);
        assert!((lower_branch_intercept().unwrap() - 1.0 / 16.0).abs() < 1e-10);
        let (m, c) = region_corner().unwrap();
        assert!((m - 0.1167).abs() < 2e-3 && (c - 0.1856).abs() < 2e-3);
        let terms = (2.0 * PI * c * (1.0 - 2.0 * c) / m, PI * c * (1.0 - 2.0 * c) / m + acot_pos(c / m.sqrt()) / m.sqrt());
        assert!((terms.0 - 2.0 * PI).abs() < 1e-6);
        assert!((terms.1 - 2.0 * PI).abs() < 1e-2);
        let trace = figure1_region(&GridConfig::default()).unwrap();
        assert!(trace.points.iter().all(|p| p.c_lower.is_none_or(|cl| cl <= p.c_upper + 1e-9)));
    }

    #[test]
    fn figure1_verdict_flips_across_branches() {
        for &m in &[0.03, 0.06, 0.09, 0.11] {
            let cu = upper_branch(m);
            assert!(positive_curvature_conditions(m, cu + 1e-3).geometric_margin > 0.0);
            assert!(positive_curvature_conditions(m, cu - 1e-3).geometric_margin < 0.0);
        }
        for &m in &[0.07, 0.09, 0.11] {
            let cl = lower_branch(m).unwrap();
            assert!(positive_curvature_conditions(m, cl - 1e-3).width_margin > 0.0);
            assert!(positive_curvature_conditions(m, cl + 1e-3).width_margin < 0.0);
        }
    }

    #[test]
    fn simplified_forms_imply_conditions() {
        for i in 1..=100 {
            let m = i as f64 / 100.0;
            let pc = positive_curvature_conditions(m, 1.0 / PI);
            assert!(pc.geometric_margin > 0.0 || pc.width_margin >= 0.0, "m = {m}");
        }
        for i in 1..=200 {
            let c = i as f64 * 0.005;
            let pc = positive_curvature_conditions(0.125, c);
            assert!(pc.geometric_margin > 0.0 || pc.width_margin >= 0.0, "c = {c}");
        }
    }

    #[test]
    fn figure2_values() {
        assert!((figure2_blue(2.0) - 1.0373).abs() < 5e-4);
        assert!((figure2_red(5.0) - 1.56416).abs() < 5e-4);
        assert!((figure2_blue(10.0) - 1.0).abs() < 1e-4);
        let pts = figure2_curves(&GridConfig { points: 50 });
        assert_eq!(pts.len(), 50);
        assert!((pts[0].inj - 0.1).abs() < 1e-15 && (pts[49].inj - 10.0).abs() < 1e-12);
    }

    #[test]
    fn lower_branch_in_both_directions() {
        for &(m, c) in &[(0.1026, 0.0875), (0.0893, 0.05), (0.1165, 0.175)] {
            assert!((lower_branch_min_k(c).unwrap() - m).abs() < 1e-4);
        }
        for &c in &[0.01, 0.08, 0.15] {
            let m = lower_branch_min_k(c).unwrap();
            assert!((lower_branch(m).unwrap() - c).abs() < 1e-8);
        }
        assert!(lower_branch_min_k(0.3).is_err());
    }

    #[test]
    fn gauss_bonnet_examples() {
        assert_eq!(gauss_bonnet_bounds(0.0, 0.0, 1.0, 0.5).area_upper_bound, 0.0);
        let b = gauss_bonnet_bounds(1.0, 0.0, 1.0, 0.25);
        assert!((b.area_upper_bound - PI).abs() < 1e-12);
        assert!((b.width_lower_bound - (4.0 * PI - PI / 4.0)).abs() < 1e-12);
        assert!(!b.area_violated);
    }

    #[test]
    fn eta_examples() {
        let torus = SurfaceModel::FlatTorus(FlatTorus::square(1.0));
        for c in [1.0, 2.0, 4.0] {
            let e = isoperimetric_eta(&torus, c);
            assert!((e.eta - 0.5).abs() < 1e-12);
            assert!(e.isoperimetric_constant <= 2.0 * PI.sqrt());
        }
        let e = isoperimetric_eta(&torus, 10.0);
        assert!((e.eta - e.isoperimetric_constant.powi(2) / 100.0).abs() < 1e-12);
        assert!((sphere_cap_ratio(1.0, 1e-10) - 2.0 * PI.sqrt()).abs() < 1e-9);
        let s = isoperimetric_eta(&SurfaceModel::sphere(1.0), 1.0);
        assert!((s.isoperimetric_constant - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn inverse_pair(c in 0.05f64..5.0, t in 0.0f64..1.0, sign in 0usize..3) {
            let k = match sign { 0 => -c * c * (0.999 * t), 1 => 0.0, _ => 4.0 * t + 1e-6 };
            let r = r0(c, k).unwrap();
            prop_assert!((ct(k, r).unwrap() - c).abs() < 1e-10 * c.max(1.0));
        }

        #[test]
        fn r0_decreasing_in_c(c in 0.1f64..3.0, k in -0.009f64..2.0) {
            prop_assert!(r0(c + 0.01, k).unwrap() < r0(c, k).unwrap());
        }
    }
}
