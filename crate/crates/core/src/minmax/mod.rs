//! Sweepouts, width estimates from pulled-tight path families, cut-and-paste surgery at a
//! node, and the competitor constructions built from them.

mod competitor;
pub mod fixtures;
mod pull_tight;
mod surgery;

use serde::{Deserialize, Serialize};

use crate::curve::{ac_functional, DiscreteCurve, Region};
use crate::error::{Error, Result};
use crate::geometry::SurfaceModel;

pub use competitor::{
    competitor_bound_positive, competitor_sweepout_config1, monotone_contraction, BoundConfig, CompetitorConfig,
    Config1Competitor, PositiveBound,
};
pub use pull_tight::{pull_tight_family, pull_tight_width, PullTightConfig, PulledFamily};
pub use surgery::{cut_and_paste, surgery_radius, SurgeryResult, SurgerySign};

/// Slices of a sweepout: regions, or paths pinned at common endpoints.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slices {
    Regions(Vec<Region>),
    Paths(Vec<DiscreteCurve>),
}

/// Finite family of slices indexed by nondecreasing parameters in `[0, 1]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sweepout {
    pub slices: Slices,
    pub params: Vec<f64>,
}

fn check_params(params: &[f64], count: usize) -> Result<()> {
    if params.len() != count || count == 0 {
        return Err(Error::Invalid(format!("{} parameters for {count} slices", params.len())));
    }
    if params.iter().any(|t| !(0.0..=1.0).contains(t)) || params.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid("sweepout parameters must be nondecreasing in [0, 1]".into()));
    }
    Ok(())
}

/// `count` equally spaced parameters from 0 to 1.
pub fn uniform_params(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|k| k as f64 / (count - 1) as f64).collect(),
    }
}

impl Sweepout {
    /// Region sweepout whose adjacent slices differ in area by at most `continuity`.
    pub fn regions(slices: Vec<Region>, params: Vec<f64>, continuity: f64) -> Result<Self> {
        check_params(&params, slices.len())?;
        for (k, w) in slices.windows(2).enumerate() {
            let jump = (w[1].area() - w[0].area()).abs();
            if jump > continuity {
                return Err(Error::Invalid(format!(
                    "area jumps by {jump} between slices {k} and {} (bound {continuity})",
                    k + 1
                )));
            }
        }
        Ok(Sweepout { slices: Slices::Regions(slices), params })
    }

    /// Path sweepout; every slice must be pinned at the endpoints of the first one.
    pub fn paths(slices: Vec<DiscreteCurve>, params: Vec<f64>) -> Result<Self> {
        check_params(&params, slices.len())?;
        let (p, q) = slices[0].endpoints();
        for (k, s) in slices.iter().enumerate() {
            if s.is_closed() {
                return Err(Error::Invalid(format!("path slice {k} is closed")));
            }
            let (a, b) = s.endpoints();
            if (a - p).norm() > 1e-9 * (1.0 + p.norm()) || (b - q).norm() > 1e-9 * (1.0 + q.norm()) {
                return Err(Error::Invalid(format!("path slice {k} is not pinned at the common endpoints")));
            }
        }
        Ok(Sweepout { slices: Slices::Paths(slices), params })
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// `A^c` of every region slice, or the length of every path slice.
    pub fn values(&self, surface: &SurfaceModel, c: f64) -> Vec<f64> {
        match &self.slices {
            Slices::Regions(r) => r.iter().map(|r| ac_functional(surface, r, c)).collect(),
            Slices::Paths(p) => p.iter().map(|p| p.length(surface)).collect(),
        }
    }

    /// Whether the first slice is the empty region.
    pub fn starts_empty(&self) -> bool {
        matches!(&self.slices, Slices::Regions(r) if r[0].witnesses.is_empty())
    }

    /// Whether the last slice is the whole surface.
    pub fn ends_full(&self) -> bool {
        matches!(&self.slices, Slices::Regions(r) if {
            let last = r.last().expect("nonempty sweepout");
            last.boundary.is_empty() && !last.witnesses.is_empty()
        })
    }
}

/// Statistics of a pulled-tight path family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PullTightReport {
    /// Largest slice length of the pulled family.
    pub family_max: f64,
    pub family_index: usize,
    /// Largest interior geodesic curvature of the longest pulled slice.
    pub family_residual: f64,
    pub rounds: usize,
    /// The width is attained by an endpoint curve.
    pub degenerate: bool,
    /// The pulled family rises above both endpoint curves.
    pub mountain_pass: bool,
    /// The region's boundary curvature toward the region is at least `-1e-6` everywhere.
    pub convex_boundary: bool,
    /// No slice got longer in any round.
    pub monotone: bool,
}

/// Maximum of the functional over a family, with the slice attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub value: f64,
    pub index: usize,
    /// Curvature residual of the attaining slice: `max |kappa - c|` toward the region for
    /// region slices, `max |kappa|` at interior vertices for path slices.
    pub residual: f64,
    /// The value bounds the min-max width from above.
    pub upper_bound: bool,
    /// The value bounds the min-max width from below.
    pub lower_bound: bool,
    pub pulled: Option<PullTightReport>,
}

/// Largest interior geodesic curvature of a pinned or closed curve.
pub(crate) fn geodesic_residual(surface: &SurfaceModel, curve: &DiscreteCurve) -> f64 {
    match curve.geodesic_curvature(surface) {
        Ok(k) => k.iter().fold(0.0, |m, x| m.max(x.abs())),
        Err(_) => f64::INFINITY,
    }
}

fn region_residual(surface: &SurfaceModel, region: &Region, c: f64) -> f64 {
    match region.geodesic_curvature(surface) {
        Ok(k) => k
            .iter()
            .zip(region.side_signs())
            .flat_map(|(k, s)| k.iter().zip(s).filter(|(_, s)| **s != 0.0).map(|(k, _)| (k - c).abs()))
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    }
}

/// Maximum of `A^c` (region slices) or length (path slices) over the sweepout.
pub fn sweepout_max(surface: &SurfaceModel, sweepout: &Sweepout, c: f64) -> WidthEstimate {
    let values = sweepout.values(surface, c);
    let (index, value) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let residual = match &sweepout.slices {
        Slices::Regions(r) if r[index].boundary.is_empty() => 0.0,
        Slices::Regions(r) => region_residual(surface, &r[index], c),
        Slices::Paths(p) => geodesic_residual(surface, &p[index]),
    };
    WidthEstimate { value: value.max(0.0), index, residual, upper_bound: true, lower_bound: false, pulled: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::fixtures::{circle, latitude};
    use crate::geometry::Point;
    use std::f64::consts::PI;

    #[test]
    fn trivial_sweepout_has_zero_width() {
        let s = SurfaceModel::flat_square(1.0);
        let sw = Sweepout::regions(vec![Region::empty()], vec![0.0], 1.0).unwrap();
        let w = sweepout_max(&s, &sw, 1.0);
        assert_eq!((w.value, w.index), (0.0, 0));
        assert!(sw.starts_empty());
    }

    #[test]
    fn concentric_circles_on_unit_torus() {
        let s = SurfaceModel::flat_square(1.0);
        let center = Point::new(0.5, 0.5);
        let radii: Vec<f64> = (1..=20).map(|k| 0.49 * k as f64 / 20.0).collect();
        let mut slices = vec![Region::empty()];
        slices.extend(radii.iter().map(|r| Region::new(&s, vec![circle(center, *r, 256)], vec![center]).unwrap()));
        let sw = Sweepout::regions(slices, uniform_params(21), 0.1).unwrap();
        let w = sweepout_max(&s, &sw, 1.0);
        let oracle = radii
            .iter()
            .map(|r| {
                let c = circle(center, *r, 256);
                c.length(&s) - c.vertices.iter().enumerate().fold(0.0, |a, (i, p)| {
                    let q = c.vertices[(i + 1) % c.len()];
                    a + 0.5 * (p.x * q.y - p.y * q.x)
                })
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((w.value - oracle).abs() < 1e-3);
        assert_eq!(w.index, 20);
        let exact = 2.0 * PI * 0.49 - PI * 0.49 * 0.49;
        assert!((w.value - exact).abs() < 1e-3);
    }

    #[test]
    fn latitude_sweepout_of_sphere() {
        let s = SurfaceModel::sphere(1.0);
        let pole_side = Point::new(1e-3, 0.0);
        let mut slices = vec![Region::empty()];
        for k in 1..40 {
            let rho = PI * k as f64 / 40.0;
            slices.push(Region::new(&s, vec![latitude(rho, 256)], vec![pole_side]).unwrap());
        }
        slices.push(Region::full(&s, pole_side).unwrap());
        let sw = Sweepout::regions(slices, uniform_params(41), 1.0).unwrap();
        assert!(sw.starts_empty() && sw.ends_full());
        let w = sweepout_max(&s, &sw, 0.0);
        assert!((w.value - 2.0 * PI).abs() < 1e-3);
        assert_eq!(w.index, 20);
        assert!(w.residual < 1e-3);
    }

    #[test]
    fn discontinuous_sweepout_rejected() {
        let s = SurfaceModel::flat_square(4.0);
        let c = Point::new(2.0, 2.0);
        let big = Region::new(&s, vec![circle(c, 1.0, 64)], vec![c]).unwrap();
        assert!(Sweepout::regions(vec![Region::empty(), big], vec![0.0, 1.0], 0.1).is_err());
    }

    #[test]
    fn paths_must_share_endpoints() {
        let line = |y: f64| {
            DiscreteCurve::pinned((0..9).map(|i| Point::new(i as f64 / 8.0, if i == 0 || i == 8 { 0.0 } else { y })).collect())
                .unwrap()
        };
        assert!(Sweepout::paths(vec![line(0.0), line(0.2)], vec![0.0, 1.0]).is_ok());
        let shifted = line(0.0).translated(&crate::geometry::Vec2::new(0.1, 0.0));
        assert!(Sweepout::paths(vec![line(0.0), shifted], vec![0.0, 1.0]).is_err());
    }
}
