//! Invariant checks of every module, runnable outside the test harness.
//!
//! Each check evaluates a property on built-in fixtures and reports pass or fail with a
//! short diagnostic. Randomized checks draw from a seeded generator, so a run is a pure
//! function of its configuration.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::{ct, figure1_region, figure2_curves, r0, GridConfig};
use crate::curve::fixtures::{circle, latitude, lemniscate};
use crate::curve::{detect_node, second_variation, Configuration, DiscreteCurve, Region, TestFunction};
use crate::error::Result;
use crate::geometry::{ConformalTorus, FlatTorus, Point, SurfaceModel, Vec2};
use crate::io::figures::{figure1_regression, figure2_regression};
use crate::io::CurveDocument;
use crate::minmax::fixtures::{figure_eight, rectangle};
use crate::minmax::{cut_and_paste, pull_tight_width, surgery_radius, PullTightConfig, SurgerySign};
use crate::shortening::{birkhoff_map, csf_step, enclosed_area, solve_prescribed_curvature, BirkhoffConfig, FlowConfig};

/// Deliberate defects for exercising the failure path of the checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Reverses the orientation of the curvature-sign fixture.
    OrientationFlip,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub seed: u64,
    /// Number of random sawtooth curves of the Birkhoff suite.
    pub birkhoff_cases: usize,
    pub fault: Option<Fault>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { seed: 0, birkhoff_cases: 50, fault: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub module: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn outcome(module: &str, name: &str, result: Result<(bool, String)>) -> CheckOutcome {
    let (pass, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome { module: module.into(), name: name.into(), pass, detail }
}

/// Runs every check in a fixed order.
pub fn run_all(cfg: &CheckConfig) -> Vec<CheckOutcome> {
    vec![
        outcome("geometry", "metric positive definite", metric_positive(cfg.seed)),
        outcome("geometry", "sphere curvature", sphere_curvature()),
        outcome("curve", "geodesic_curvature sign", curvature_sign(cfg.fault)),
        outcome("curve", "gauss-bonnet closure", gauss_bonnet_closure()),
        outcome("curve", "figure-eight node", figure_eight_node()),
        outcome("curve", "config-1 second variation", config1_second_variation()),
        outcome("shortening", "birkhoff suite", birkhoff_check(cfg.seed, cfg.birkhoff_cases)),
        outcome("shortening", "csf isoperimetric ratio", csf_isoperimetric()),
        outcome("shortening", "sphere latitude solve", sphere_solve()),
        outcome("minmax", "surgery decrease", surgery_decrease()),
        outcome("minmax", "rectangle width", rectangle_width()),
        outcome("criteria", "inverse pair", inverse_pair(cfg.seed)),
        outcome("criteria", "ct monotone", ct_monotone()),
        outcome("criteria", "ct continuous at k = 0", ct_continuity()),
        outcome("criteria", "figure regression", figure_regression()),
        outcome("io", "json round trip", json_round_trip(cfg.seed)),
    ]
}

fn metric_positive(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let conformal = SurfaceModel::ConformalTorus(ConformalTorus::trig(FlatTorus::square(1.0), 16, 0.3, 1.0, 1.0)?);
    let surfaces = [SurfaceModel::flat_square(1.0), SurfaceModel::sphere(1.0), SurfaceModel::capped_cylinder(2.0), conformal];
    let mut worst = f64::INFINITY;
    for s in &surfaces {
        for _ in 0..50 {
            let p = match s {
                SurfaceModel::Revolution(r) => Point::new(rng.gen_range(0.05..r.profile.extent() - 0.05), rng.gen_range(0.0..2.0 * PI)),
                _ => Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
            };
            let g = s.metric_at(&p)?;
            let sym = (g[(0, 1)] - g[(1, 0)]).abs();
            let det = g.determinant();
            if sym > 1e-14 {
                return Ok((false, format!("asymmetric metric at ({}, {})", p.x, p.y)));
            }
            worst = worst.min(det.min(g[(0, 0)]));
        }
    }
    Ok((worst > 0.0, format!("smallest leading minor {worst:.3e}")))
}

fn sphere_curvature() -> Result<(bool, String)> {
    let s = SurfaceModel::sphere(2.0);
    let k = s.gauss_curvature_at(&Point::new(1.0, 0.5))?.value;
    Ok(((k - 0.25).abs() < 1e-12, format!("K = {k}")))
}

fn curvature_sign(fault: Option<Fault>) -> Result<(bool, String)> {
    let s = SurfaceModel::flat_square(4.0);
    let mut curve = circle(Point::new(2.0, 2.0), 0.5, 64);
    if fault == Some(Fault::OrientationFlip) {
        curve = curve.reversed();
    }
    let kappa = curve.geodesic_curvature(&s)?;
    let min = kappa.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((min > 0.0 && kappa.iter().all(|k| (k - 2.0).abs() < 1e-2), format!("counterclockwise circle of radius 0.5: min kappa {min:.6}")))
}

fn gauss_bonnet_closure() -> Result<(bool, String)> {
    let conformal = SurfaceModel::ConformalTorus(ConformalTorus::trig(FlatTorus::square(2.0), 16, 0.2, 1.0, 1.0)?);
    let cases = [
        (SurfaceModel::flat_square(4.0), circle(Point::new(2.0, 2.0), 1.0, 128)),
        (SurfaceModel::sphere(1.0), latitude(1.1, 256)),
        (conformal, circle(Point::new(1.0, 1.0), 0.5, 256)),
    ];
    let mut worst: f64 = 0.0;
    for (s, c) in &cases {
        worst = worst.max((c.gauss_bonnet_sum(s)? - 2.0 * PI).abs());
    }
    Ok((worst < 1e-3, format!("largest deviation from 2 pi: {worst:.3e}")))
}

fn figure_eight_node() -> Result<(bool, String)> {
    let s = SurfaceModel::flat_square(40.0);
    let fx = lemniscate(1.0, PI / 2.0, 0.05);
    let Some(node) = detect_node(&s, &fx.curve)? else {
        return Ok((false, "no node found".into()));
    };
    let pass = node.config == Configuration::Config1 && (node.alpha - PI / 2.0).abs() < 1e-6;
    Ok((pass, format!("{:?}, alpha {:.6}", node.config, node.alpha)))
}

fn config1_second_variation() -> Result<(bool, String)> {
    let s = SurfaceModel::flat_square(40.0);
    let (c, alpha) = (1.0, PI / 2.0);
    let fx = lemniscate(c, alpha, 0.01);
    let node = detect_node(&s, &fx.curve)?;
    let q = second_variation(&s, &fx.curve, node.as_ref(), &TestFunction::constant(fx.curve.len(), 1.0), c)?;
    let expected = -fx.curve.length(&s) * c * c - 4.0 * c / (alpha / 2.0).tan();
    let rel = ((q - expected) / expected).abs();
    Ok((rel < 1e-3, format!("{q:.6} vs {expected:.6}")))
}

/// Summary of the Birkhoff map on random pinned sawtooth curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffSuite {
    pub cases: usize,
    /// Largest length increase over all rounds and cases; nonpositive when monotone.
    pub max_increase: f64,
    /// Smallest first-round length decrease over all cases.
    pub min_decrease: f64,
    /// Smallest distance of a sawtooth from the geodesic between its endpoints.
    pub min_distance: f64,
    /// Largest vertex displacement of a discrete geodesic under one round.
    pub max_fixed_point_displacement: f64,
}

/// Sawtooth with `teeth` teeth of chart height `amplitude` on the chart segment `a b`.
pub fn sawtooth(a: Point, b: Point, teeth: usize, amplitude: f64) -> Result<DiscreteCurve> {
    let d = b - a;
    let normal = Vec2::new(-d.y, d.x) / d.norm();
    let n = 2 * teeth + 1;
    let v = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            a + d * t + normal * if i % 2 == 1 { amplitude } else { 0.0 }
        })
        .collect();
    DiscreteCurve::pinned(v)
}

/// Largest metric chord from the vertices of `curve` to a dense sample of `reference`.
fn distance_from(surface: &SurfaceModel, curve: &DiscreteCurve, reference: &[Point]) -> f64 {
    curve
        .vertices
        .iter()
        .map(|p| reference.iter().map(|q| surface.chord_length(p, q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Applies the Birkhoff map to `cases` random sawtooth curves, alternating a flat torus and
/// the unit sphere, for `rounds` rounds each; also checks that the discrete geodesic
/// between the endpoints of each case is a fixed point.
pub fn birkhoff_suite(seed: u64, cases: usize, rounds: usize) -> Result<BirkhoffSuite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat = SurfaceModel::flat_square(4.0);
    let sphere = SurfaceModel::sphere(1.0);
    let cap = 0.5;
    let mut suite = BirkhoffSuite {
        cases,
        max_increase: f64::NEG_INFINITY,
        min_decrease: f64::INFINITY,
        min_distance: f64::INFINITY,
        max_fixed_point_displacement: 0.0,
    };
    for k in 0..cases {
        let on_sphere = k % 2 == 1;
        let surface = if on_sphere { &sphere } else { &flat };
        let angle = rng.gen_range(0.0..2.0 * PI);
        let (a, length) = if on_sphere {
            (Point::new(rng.gen_range(1.2..1.9), rng.gen_range(0.0..PI)), rng.gen_range(0.5..0.9))
        } else {
            (Point::new(rng.gen_range(1.0..3.0), rng.gen_range(1.0..3.0)), rng.gen_range(0.6..1.5))
        };
        let b = a + Vec2::new(angle.cos(), angle.sin()) * length;
        let teeth = rng.gen_range(6..16);
        let amplitude = rng.gen_range(0.12..0.3);
        let mut curve = sawtooth(a, b, teeth, amplitude)?;
        let geodesic = crate::geometry::solve_geodesic(surface, &a, &b, 1e-12)?;
        let dense = geodesic.sample(surface, 400)?;
        suite.min_distance = suite.min_distance.min(distance_from(surface, &curve, &dense));
        let mut before = curve.length(surface);
        for round in 0..rounds {
            let cfg = BirkhoffConfig::for_curve(surface, &curve, cap);
            curve = birkhoff_map(surface, &curve, &cfg)?;
            let after = curve.length(surface);
            suite.max_increase = suite.max_increase.max(after - before);
            if round == 0 {
                suite.min_decrease = suite.min_decrease.min(before - after);
            }
            before = after;
        }
        // Break parameters of the map fall on vertices when the vertex count is a multiple
        // of the interval count plus one.
        let probe = DiscreteCurve::pinned(geodesic.sample(surface, 16)?)?;
        let cfg = BirkhoffConfig::for_curve(surface, &probe, cap);
        let intervals = 2 * cfg.breaks + 2;
        let exact = DiscreteCurve::pinned(geodesic.sample(surface, intervals * 4)?)?;
        let moved = birkhoff_map(surface, &exact, &cfg)?;
        suite.max_fixed_point_displacement = suite.max_fixed_point_displacement.max(moved.max_displacement(&exact));
    }
    Ok(suite)
}

fn birkhoff_check(seed: u64, cases: usize) -> Result<(bool, String)> {
    let s = birkhoff_suite(seed, cases, 3)?;
    let pass = s.max_increase <= 1e-12 && s.min_decrease > 0.0 && s.max_fixed_point_displacement < 1e-6;
    Ok((
        pass,
        format!(
            "{} curves: max increase {:.2e}, min decrease {:.3e}, fixed-point displacement {:.2e}",
            s.cases, s.max_increase, s.min_decrease, s.max_fixed_point_displacement
        ),
    ))
}

fn csf_isoperimetric() -> Result<(bool, String)> {
    let s = SurfaceModel::flat_square(10.0);
    let v: Vec<Point> = (0..128)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 128.0;
            Point::new(5.0 + 2.0 * t.cos(), 5.0 + t.sin())
        })
        .collect();
    let mut curve = DiscreteCurve::closed(v, Vec2::zeros())?;
    let ratio = |c: &DiscreteCurve| -> Result<f64> {
        let l = c.length(&s);
        Ok(l * l / (4.0 * PI * enclosed_area(&s, c)?))
    };
    let mut prev = ratio(&curve)?;
    let first = prev;
    for step in 0..300 {
        let min = curve.segment_lengths(&s).into_iter().fold(f64::INFINITY, f64::min);
        curve = csf_step(&s, &curve, 0.2 * min * min)?;
        let r = ratio(&curve)?;
        if r > prev + 1e-6 {
            return Ok((false, format!("ratio rose from {prev} to {r} at step {step}")));
        }
        prev = r;
    }
    Ok((true, format!("ratio {first:.6} -> {prev:.6} over 300 steps")))
}

fn sphere_solve() -> Result<(bool, String)> {
    let s = SurfaceModel::sphere(1.0);
    let seed = Region::new(&s, vec![latitude(0.6, 128)], vec![Point::new(0.1, 0.0)])?;
    let out = solve_prescribed_curvature(&s, 1.0, &seed, &FlowConfig::default())?;
    let l = out.boundary_length(&s);
    Ok(((l - PI * 2f64.sqrt()).abs() < 1e-3, format!("length {l:.6}, expected {:.6}", PI * 2f64.sqrt())))
}

fn surgery_decrease() -> Result<(bool, String)> {
    let fx = figure_eight(1.0, PI / 2.0, 0.05);
    let rc = surgery_radius(&fx.surface, &fx.region.boundary[0], &fx.node, fx.c);
    let phi = TestFunction::constant(fx.region.boundary[0].len(), 1.0);
    let mut detail = Vec::new();
    let mut pass = true;
    for sign in [SurgerySign::Plus, SurgerySign::Minus] {
        let r = cut_and_paste(&fx.surface, &fx.region, &fx.node, &phi, 0.01, 0.5 * rc, sign, fx.c)?;
        pass &= r.decreases;
        detail.push(format!("{sign:?} drop {:.4}", r.decrease));
    }
    Ok((pass, detail.join(", ")))
}

fn rectangle_width() -> Result<(bool, String)> {
    let fx = rectangle(2.0, 1.0, 0.1);
    let cfg = PullTightConfig { slices: 8, ..PullTightConfig::default() };
    let w = pull_tight_width(&fx.surface, &fx.region, &fx.first, &fx.second, &cfg)?;
    Ok(((w.value - 4.0).abs() < 1e-9, format!("width {:.9}", w.value)))
}

fn inverse_pair(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let c: f64 = rng.gen_range(0.05..5.0);
        let k = match i % 3 {
            0 => rng.gen_range(0.01..4.0),
            1 => 0.0,
            _ => -c * c * rng.gen_range(0.01..0.99),
        };
        worst = worst.max((ct(k, r0(c, k)?)? - c).abs() / c.max(1.0));
    }
    Ok((worst < 1e-10, format!("largest error {worst:.2e}")))
}

fn ct_monotone() -> Result<(bool, String)> {
    for i in 0..40 {
        let k = -2.0 + 4.0 * i as f64 / 39.0;
        let mut prev = f64::INFINITY;
        for j in 1..200 {
            let r = 0.01 * j as f64;
            if k > 0.0 && r * k.sqrt() >= PI {
                break;
            }
            let v = ct(k, r)?;
            if !(v < prev) {
                return Ok((false, format!("ct({k}, r) not decreasing at r = {r}")));
            }
            let next = k + 0.05;
            if (next <= 0.0 || r * next.sqrt() < PI) && !(ct(next, r)? < v) {
                return Ok((false, format!("ct(k, {r}) not decreasing in k at k = {k}")));
            }
            prev = v;
        }
    }
    Ok((true, "decreasing in r and in k on a 40 x 200 grid".into()))
}

fn ct_continuity() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let r = 0.1 + 9.9 * i as f64 / 99.0;
        worst = worst.max((ct(1e-8, r)? - 1.0 / r).abs()).max((ct(-1e-8, r)? - 1.0 / r).abs());
    }
    Ok((worst < 1e-6, format!("largest deviation {worst:.2e}")))
}

fn figure_regression() -> Result<(bool, String)> {
    let grid = GridConfig::default();
    let mut all = figure1_regression(&figure1_region(&grid)?, None);
    all.extend(figure2_regression(&figure2_curves(&grid), None));
    let failed = all.iter().filter(|r| !r.pass).count();
    Ok((failed == 0, format!("{} of {} reference points within tolerance", all.len() - failed, all.len())))
}

fn json_round_trip(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Point> = (0..64).map(|_| Point::new(rng.gen_range(-1e3..1e3), rng.gen::<f64>())).collect();
    let curve = DiscreteCurve::closed(v, Vec2::new(rng.gen(), 0.0))?;
    let doc = CurveDocument::new(&SurfaceModel::flat_square(1.0), &curve);
    let back = CurveDocument::from_json(&doc.to_json()?)?;
    let exact = back.curve.vertices.iter().zip(&curve.vertices).all(|(a, b)| a.x.to_bits() == b.x.to_bits() && a.y.to_bits() == b.y.to_bits());
    Ok((exact && back.curve.kind == curve.kind, "64 random vertices".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass_by_default() {
        let out = run_all(&CheckConfig { birkhoff_cases: 6, ..CheckConfig::default() });
        let failed: Vec<_> = out.iter().filter(|o| !o.pass).collect();
        assert!(failed.is_empty(), "{failed:?}");
    }

    #[test]
    fn orientation_flip_is_caught() {
        let (pass, _) = curvature_sign(Some(Fault::OrientationFlip)).unwrap();
        assert!(!pass);
    }

    #[test]
    fn sawtooth_shape() {
        let c = sawtooth(Point::new(0.0, 0.0), Point::new(1.0, 0.0), 5, 0.2).unwrap();
        assert_eq!(c.len(), 11);
        assert_eq!(c.vertices[1], Point::new(0.1, 0.2));
        assert_eq!(c.endpoints(), (Point::new(0.0, 0.0), Point::new(1.0, 0.0)));
    }
}
