//! Pull-tight of path families by the Birkhoff map and the length width of a region.

use serde::{Deserialize, Serialize};

use super::{geodesic_residual, PullTightReport, WidthEstimate};
use crate::curve::{DiscreteCurve, Region};
use crate::error::{Error, Result};
use crate::geometry::{Point, SurfaceModel};
use crate::shortening::{birkhoff_map, BirkhoffConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PullTightConfig {
    /// Number of slices of the initial family, endpoints included.
    pub slices: usize,
    /// Vertex count of every slice.
    pub vertices: usize,
    /// Cap on every replacement geodesic; `None` uses half the injectivity radius.
    pub r0: Option<f64>,
    /// Stop once the longest slice shortens by less than this in one round.
    pub tol: f64,
    pub max_rounds: usize,
    /// Tolerance for the endpoints lying on the region boundary.
    pub boundary_tol: f64,
}

impl Default for PullTightConfig {
    fn default() -> Self {
        PullTightConfig { slices: 64, vertices: 129, r0: None, tol: 1e-10, max_rounds: 500, boundary_tol: 1e-6 }
    }
}

/// A path family after pull-tight.
#[derive(Clone, Debug)]
pub struct PulledFamily {
    pub slices: Vec<DiscreteCurve>,
    pub rounds: usize,
    /// Longest slice length after every round, starting with the initial family.
    pub max_lengths: Vec<f64>,
    /// No slice got longer in any round.
    pub monotone: bool,
}

fn longest(surface: &SurfaceModel, slices: &[DiscreteCurve]) -> (usize, f64) {
    slices
        .iter()
        .map(|s| s.length(surface))
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, l)| if l > best.1 { (i, l) } else { best })
}

/// Applies the Birkhoff map to every slice until the longest slice stops shortening.
pub fn pull_tight_family(surface: &SurfaceModel, family: Vec<DiscreteCurve>, cfg: &PullTightConfig) -> Result<PulledFamily> {
    if family.is_empty() {
        return Err(Error::Invalid("empty path family".into()));
    }
    let r0 = cfg.r0.unwrap_or(0.5 * surface.local_uniqueness_radius());
    let mut slices = family;
    let mut lengths: Vec<f64> = slices.iter().map(|s| s.length(surface)).collect();
    let mut max_lengths = vec![longest(surface, &slices).1];
    let mut monotone = true;
    for round in 1..=cfg.max_rounds {
        let mut next = Vec::with_capacity(slices.len());
        for (slice, before) in slices.iter().zip(&lengths) {
            let out = birkhoff_map(surface, slice, &BirkhoffConfig::for_curve(surface, slice, r0))?;
            if out.length(surface) > before * (1.0 + 1e-9) + 1e-12 {
                monotone = false;
            }
            next.push(out);
        }
        slices = next;
        lengths = slices.iter().map(|s| s.length(surface)).collect();
        let max = longest(surface, &slices).1;
        let drop = max_lengths.last().unwrap() - max;
        max_lengths.push(max);
        if drop < cfg.tol {
            return Ok(PulledFamily { slices, rounds: round, max_lengths, monotone });
        }
    }
    Err(Error::IterationBudget(cfg.max_rounds))
}

/// Vertexwise chart interpolation between two curves with equal vertex counts.
fn interpolate(a: &DiscreteCurve, b: &DiscreteCurve, t: f64) -> Result<DiscreteCurve> {
    let v: Vec<Point> = a.vertices.iter().zip(&b.vertices).map(|(p, q)| p + (q - p) * t).collect();
    DiscreteCurve::pinned(v)
}

/// Length width of `region` between two boundary paths pinned at the same points.
///
/// The initial family interpolates linearly between the arclength-resampled endpoint
/// curves; every slice, endpoints included, is then pulled tight. The value is
/// `max{length(first), pulled maximum, length(second)}`, and the report carries the
/// pulled maximum and the geodesic residual of the slice attaining it.
pub fn pull_tight_width(
    surface: &SurfaceModel,
    region: &Region,
    first: &DiscreteCurve,
    second: &DiscreteCurve,
    cfg: &PullTightConfig,
) -> Result<WidthEstimate> {
    if first.is_closed() || second.is_closed() {
        return Err(Error::Invalid("endpoint curves must be pinned".into()));
    }
    let (p, q) = first.endpoints();
    let (p2, q2) = second.endpoints();
    let scale = 1.0 + p.norm() + q.norm();
    if (p - p2).norm() > 1e-9 * scale || (q - q2).norm() > 1e-9 * scale {
        return Err(Error::Invalid("endpoint curves do not share their endpoints".into()));
    }
    if !region.boundary.is_empty() {
        for x in [p, q] {
            if region.distance_to_boundary(&x) > cfg.boundary_tol {
                return Err(Error::Invalid(format!("endpoint ({}, {}) is not on the region boundary", x.x, x.y)));
            }
        }
    }
    let convex_boundary = region
        .geodesic_curvature(surface)?
        .iter()
        .zip(region.side_signs())
        .all(|(k, s)| k.iter().zip(s).all(|(k, s)| *s == 0.0 || *k >= -1e-6));
    let a = first.resample(surface, cfg.vertices)?;
    let b = second.resample(surface, cfg.vertices)?;
    let count = cfg.slices.max(2);
    let family = (0..count)
        .map(|k| interpolate(&a, &b, k as f64 / (count - 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    let pulled = pull_tight_family(surface, family, cfg)?;
    let (family_index, family_max) = longest(surface, &pulled.slices);
    let family_residual = geodesic_residual(surface, &pulled.slices[family_index]);
    let len1 = first.length(surface);
    let len2 = second.length(surface);
    let end_max = len1.max(len2);
    let tol = 1e-6 * end_max.max(1.0);
    let mountain_pass = family_max > end_max + tol;
    let (value, index, residual) = if mountain_pass {
        (family_max, family_index, family_residual)
    } else if len1 >= len2 {
        (len1, 0, geodesic_residual(surface, first))
    } else {
        (len2, count - 1, geodesic_residual(surface, second))
    };
    Ok(WidthEstimate {
        value,
        index,
        residual,
        upper_bound: true,
        lower_bound: false,
        pulled: Some(PullTightReport {
            family_max,
            family_index,
            family_residual,
            rounds: pulled.rounds,
            degenerate: !mountain_pass,
            mountain_pass,
            convex_boundary,
            monotone: pulled.monotone,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minmax::fixtures::{dumbbell, rectangle};

    #[test]
    fn rectangle_width_is_the_longer_endpoint() {
        let fx = rectangle(2.0, 1.0, 0.05);
        let w = pull_tight_width(&fx.surface, &fx.region, &fx.first, &fx.second, &PullTightConfig::default()).unwrap();
        let report = w.pulled.unwrap();
        assert!(report.degenerate && !report.mountain_pass);
        assert!((w.value - 4.0).abs() < 1e-9);
        assert!((report.family_max - 2.0).abs() < 1e-6);
        assert!(report.monotone);
    }

    #[test]
    fn dumbbell_family_pulls_to_the_neck() {
        let fx = dumbbell(1.0, 2.0, 0.5, 0.05);
        let cfg = PullTightConfig { slices: 16, ..PullTightConfig::default() };
        let w = pull_tight_width(&fx.surface, &fx.region, &fx.first, &fx.second, &cfg).unwrap();
        let report = w.pulled.unwrap();
        assert!((report.family_max - 0.5).abs() < 1e-6, "{}", report.family_max);
        assert!(report.family_residual < 1e-2);
        assert!(!report.convex_boundary);
        assert!(report.monotone);
    }

    #[test]
    fn mismatched_endpoints_rejected() {
        let fx = rectangle(2.0, 1.0, 0.05);
        let moved = fx.second.translated(&crate::geometry::Vec2::new(0.0, 0.1));
        assert!(pull_tight_width(&fx.surface, &fx.region, &fx.first, &moved, &PullTightConfig::default()).is_err());
    }
}
