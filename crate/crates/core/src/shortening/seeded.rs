//! End-to-end solve of a disk with boundary curvature `c` from a built-in seed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{solve_with_trace, FlowConfig, FlowRecord};
use crate::curve::{embedded_lift_check, lift_contact, second_variation, DiscreteCurve, LiftContact, LiftVerdict, Region, TestFunction};
use crate::error::{Error, Result};
use crate::geometry::{Point, Profile, SurfaceModel, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub c: f64,
    /// Vertex count of the seed curve.
    pub vertices: usize,
    /// Stopping threshold for `max |kappa - c|`.
    pub tol: f64,
    /// Seed of the random perturbation of the initial curve.
    pub seed: u64,
    /// Relative amplitude of the perturbation.
    pub perturbation: f64,
}

impl SolveRequest {
    pub fn new(c: f64) -> Self {
        SolveRequest { c, vertices: 128, tol: 1e-6, seed: 0, perturbation: 0.02 }
    }
}

/// Second variation of `A^c` along `phi = 1`; negative values certify index at least one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstabilityCertificate {
    pub second_variation: f64,
    /// `minK + c^2 > 0`, under which the value must be negative.
    pub expected_negative: bool,
    pub unstable: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Solution {
    pub region: Region,
    pub trace: Vec<FlowRecord>,
    pub length: f64,
    pub area: f64,
    pub ac: f64,
    pub max_residual: f64,
    pub contact: LiftContact,
    pub certificate: InstabilityCertificate,
}

/// Smooth relative perturbation `1 + amplitude * sum_m (a_m cos m t + b_m sin m t)` for
/// modes 2 to 4 with seeded coefficients in `[-1/3, 1/3]`.
fn perturbation(seed: u64, amplitude: f64) -> impl Fn(f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(-1.0..1.0) / 3.0, rng.gen_range(-1.0..1.0) / 3.0)).collect();
    move |t: f64| {
        1.0 + amplitude
            * coeffs.iter().enumerate().map(|(k, (a, b))| a * ((k + 2) as f64 * t).cos() + b * ((k + 2) as f64 * t).sin()).sum::<f64>()
    }
}

/// Latitude distance from the pole at which `f'/f = c`.
fn latitude_of_curvature(profile: &Profile, c: f64) -> Result<f64> {
    let top = match *profile {
        Profile::Sphere { radius } => PI * radius / 2.0,
        Profile::CappedCylinder { .. } => PI / 2.0,
    };
    let g = |s: f64| {
        let (f, df, _) = profile.jet(s);
        df / f - c
    };
    let (mut lo, mut hi) = (1e-9 * top, top);
    if g(hi) >= 0.0 {
        return Err(Error::DomainError(format!("no latitude of curvature {c}")));
    }
    while hi - lo > 1e-15 * top {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Perturbed seed disk: a chart circle of radius `1/c` (scaled by the conformal factor at
/// the center) on tori, a latitude cap on surfaces of revolution.
pub fn seed_region(surface: &SurfaceModel, req: &SolveRequest) -> Result<Region> {
    let n = req.vertices;
    let bump = perturbation(req.seed, req.perturbation);
    let angle = |k: usize| 2.0 * PI * k as f64 / n as f64;
    match surface {
        SurfaceModel::Revolution(r) => {
            let s0 = latitude_of_curvature(&r.profile, req.c)?;
            let v = (0..n).map(|k| Point::new(s0 * bump(angle(k)), angle(k))).collect();
            let curve = DiscreteCurve::closed(v, Vec2::new(0.0, 2.0 * PI))?;
            Region::new(surface, vec![curve], vec![Point::new(0.5 * s0, 0.0)])
        }
        SurfaceModel::FlatTorus(_) | SurfaceModel::ConformalTorus(_) => {
            let periods = surface.periods();
            let center = (periods[0] + periods[1]) * 0.5;
            let scale = match surface {
                SurfaceModel::ConformalTorus(t) => t.field(&center).0.exp(),
                _ => 1.0,
            };
            let radius = 1.0 / (req.c * scale);
            let v = (0..n)
                .map(|k| {
                    let t = angle(k);
                    center + Vec2::new(t.cos(), t.sin()) * (radius * bump(t))
                })
                .collect();
            Region::new(surface, vec![DiscreteCurve::closed(v, Vec2::zeros())?], vec![center])
        }
    }
}

/// Solves for a disk whose boundary has constant curvature `c` toward it, then checks the
/// boundary against its period translates and evaluates the instability certificate.
///
/// On flat tori the circle of curvature `c` is first tested against its lattice translates
/// and the solve is refused when it cannot be embedded.
pub fn solve_on_surface(surface: &SurfaceModel, req: &SolveRequest) -> Result<Solution> {
    if !(req.c > 0.0) || !req.c.is_finite() {
        return Err(Error::DomainError(format!("curvature must be positive, got {}", req.c)));
    }
    if let SurfaceModel::FlatTorus(t) = surface {
        if embedded_lift_check(surface, req.c)? == LiftVerdict::NotEmbeddable {
            return Err(Error::NotEmbeddable { c: req.c, threshold: 2.0 / t.shortest_vector().norm() });
        }
    }
    let seed = seed_region(surface, req)?;
    let cfg = FlowConfig { residual: req.tol, ..FlowConfig::default() };
    let (region, trace) = solve_with_trace(surface, req.c, &seed, &cfg)?;
    let curve = &region.boundary[0];
    let contact = lift_contact(surface, curve, 1e-9)?;
    if !matches!(contact, LiftContact::Embedded { .. }) {
        return Err(Error::EmbeddednessLost(format!("{contact:?}")));
    }
    let length = region.boundary_length(surface);
    let area = region.area();
    let max_residual = trace.last().map_or(f64::INFINITY, |r| r.max_residual);
    let q = second_variation(surface, curve, None, &TestFunction::constant(curve.len(), 1.0), req.c)?;
    let min_k = surface.surface_stats().min_k.value;
    Ok(Solution {
        length,
        area,
        ac: length - req.c * area,
        max_residual,
        contact,
        certificate: InstabilityCertificate {
            second_variation: q,
            expected_negative: min_k + req.c * req.c > 0.0,
            unstable: q < 0.0,
        },
        region,
        trace,
    })
}
