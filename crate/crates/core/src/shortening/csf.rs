//! Explicit discrete curve shortening flow.

use serde::{Deserialize, Serialize};

use super::FlowConfig;
use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::geometry::{Point, SurfaceModel, Vec2};

/// Stability bound `0.4 * (min segment length)^2` of the explicit scheme.
pub fn stability_bound(surface: &SurfaceModel, curve: &DiscreteCurve) -> f64 {
    let min = curve.segment_lengths(surface).into_iter().fold(f64::INFINITY, f64::min);
    0.4 * min * min
}

/// Metric area of the disk (or pole side) bounded by a closed curve.
pub fn enclosed_area(surface: &SurfaceModel, curve: &DiscreteCurve) -> Result<f64> {
    Ok(surface.loop_integrals(&curve.vertices, &curve.shift())?.0.abs())
}

/// Moves every vertex along its curvature vector for time `dt`.
pub fn csf_step(surface: &SurfaceModel, curve: &DiscreteCurve, dt: f64) -> Result<DiscreteCurve> {
    let bound = stability_bound(surface, curve);
    if !(dt <= bound) {
        return Err(Error::StabilityViolation { dt, bound });
    }
    let kappa = curve.geodesic_curvature(surface)?;
    let normals = curve.left_normals(surface)?;
    let vertices = curve
        .vertices
        .iter()
        .zip(kappa.iter().zip(&normals))
        .map(|(x, (k, nu))| {
            let v: Vec2 = nu * (dt * k);
            // Second-order exponential map; |v| is far below the segment length.
            let y = x + v - surface.christoffel(x, &v, &v) * 0.5;
            surface.check_chart(&y)?;
            Ok(y)
        })
        .collect::<Result<Vec<Point>>>()?;
    let out = DiscreteCurve { vertices, kind: curve.kind };
    if out.segment_lengths(surface).iter().any(|l| !(*l > 0.0)) {
        return Err(Error::CollapseDetected(enclosed_area(surface, &out).unwrap_or(0.0)));
    }
    Ok(out)
}

/// Recorded slices of a flow, from the input curve to the collapsed one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowPath {
    pub slices: Vec<DiscreteCurve>,
    pub times: Vec<f64>,
    pub lengths: Vec<f64>,
    pub areas: Vec<f64>,
    /// Largest length over every step of the flow, recorded or not.
    pub max_length: f64,
    /// Point the curve collapsed to, when it lies in the chart.
    pub collapse_point: Option<Point>,
    /// The flow stopped because a loop around the axis came within the pole margin of a
    /// pole it no longer encloses in its limit.
    pub reached_chart_edge: bool,
}

impl FlowPath {
    /// The path run backwards: from the point curve out to the input curve.
    pub fn reversed(&self) -> FlowPath {
        let end = *self.times.last().unwrap_or(&0.0);
        let mut out = self.clone();
        out.slices.reverse();
        out.lengths.reverse();
        out.areas.reverse();
        out.times = self.times.iter().rev().map(|t| end - t).collect();
        out
    }
}

/// Distance from the poles below which a loop winding around the axis stops flowing.
const POLE_MARGIN: f64 = 1e-2;

fn near_pole(surface: &SurfaceModel, curve: &DiscreteCurve) -> bool {
    match surface {
        SurfaceModel::Revolution(r) if curve.shift().norm() > 0.0 => {
            let extent = r.profile.extent();
            curve.vertices.iter().any(|p| p.x < POLE_MARGIN || p.x > extent - POLE_MARGIN)
        }
        _ => false,
    }
}

/// Runs the flow until the enclosed area falls below the configured floor.
///
/// The region must contain no closed geodesic for the flow to shrink to a point; this is
/// not checked. A contractible curve ends in a slice with every vertex at the centroid of
/// the last recorded curve. A loop around the axis of a surface of revolution ends at the
/// floor, since its limit point (the pole) lies outside the chart, or earlier when it comes
/// within a small margin of a pole (see [`FlowPath::reached_chart_edge`]).
pub fn csf_path_to_point(surface: &SurfaceModel, curve: &DiscreteCurve, cfg: &FlowConfig) -> Result<FlowPath> {
    if !curve.is_closed() {
        return Err(Error::Invalid("the flow acts on closed curves".into()));
    }
    let length0 = curve.length(surface);
    if length0 == 0.0 {
        return Ok(FlowPath {
            slices: vec![curve.clone()],
            times: vec![0.0],
            lengths: vec![0.0],
            areas: vec![0.0],
            max_length: 0.0,
            collapse_point: Some(curve.vertices[0]),
            reached_chart_edge: false,
        });
    }
    let area0 = enclosed_area(surface, curve)?;
    let floor = cfg.area_floor * area0;
    let mut path = FlowPath {
        slices: vec![curve.clone()],
        times: vec![0.0],
        lengths: vec![length0],
        areas: vec![area0],
        max_length: length0,
        collapse_point: None,
        reached_chart_edge: false,
    };
    let mut current = curve.clone();
    let mut t = 0.0;
    for step in 1..=cfg.max_iterations {
        let dt = cfg.dt_fraction * stability_bound(surface, &current);
        current = csf_step(surface, &current, dt)?;
        t += dt;
        if step % cfg.resample_every.max(1) == 0 {
            current = current.resample(surface, current.len())?;
        }
        let length = current.length(surface);
        path.max_length = path.max_length.max(length);
        let area = enclosed_area(surface, &current)?;
        let edge = near_pole(surface, &current);
        let done = area < floor || edge;
        if step % cfg.record_every.max(1) == 0 || done {
            path.slices.push(current.clone());
            path.times.push(t);
            path.lengths.push(length);
            path.areas.push(area);
        }
        if done {
            path.reached_chart_edge = edge && area >= floor;
            if current.shift().norm() == 0.0 {
                let centroid = current.vertices.iter().fold(Vec2::zeros(), |acc, p| acc + p) / current.len() as f64;
                let point = DiscreteCurve { vertices: vec![centroid; current.len()], kind: current.kind };
                path.slices.push(point);
                path.times.push(t);
                path.lengths.push(0.0);
                path.areas.push(0.0);
                path.collapse_point = Some(centroid);
            }
            return Ok(path);
        }
    }
    Err(Error::NoCollapse(cfg.max_iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::fixtures::{circle, latitude};
    use std::f64::consts::PI;

    #[test]
    fn circle_radius_rate() {
        let s = SurfaceModel::flat_square(10.0);
        let r0 = 2.0;
        let c = circle(Point::new(0.0, 0.0), r0, 128);
        let dt = 0.5 * stability_bound(&s, &c);
        let mut cur = c.clone();
        for _ in 0..10 {
            cur = csf_step(&s, &cur, dt).unwrap();
        }
        let r1 = cur.vertices.iter().map(|p| p.norm()).sum::<f64>() / cur.len() as f64;
        let rate = (r1 - r0) / (10.0 * dt);
        assert!((rate + 1.0 / r0).abs() < 0.01 / r0, "rate {rate}");
    }

    #[test]
    fn stability_violation() {
        let s = SurfaceModel::flat_square(10.0);
        let c = circle(Point::new(0.0, 0.0), 1.0, 64);
        assert!(matches!(csf_step(&s, &c, 1.0), Err(Error::StabilityViolation { .. })));
    }

    #[test]
    fn torus_geodesic_is_stationary() {
        let s = SurfaceModel::flat_square(1.0);
        let v: Vec<Point> = (0..32).map(|i| Point::new(i as f64 / 32.0, 0.25)).collect();
        let c = DiscreteCurve::closed(v, Vec2::new(1.0, 0.0)).unwrap();
        let out = csf_step(&s, &c, 0.5 * stability_bound(&s, &c)).unwrap();
        assert!(out.max_displacement(&c) < 1e-8);
    }

    #[test]
    fn latitude_moves_to_pole() {
        let s = SurfaceModel::sphere(1.0);
        let rho = 1.0;
        let c = latitude(rho, 64);
        let dt = 0.5 * stability_bound(&s, &c);
        let mut cur = c.clone();
        let mut area = enclosed_area(&s, &cur).unwrap();
        for _ in 0..20 {
            cur = csf_step(&s, &cur, dt).unwrap();
            let a = enclosed_area(&s, &cur).unwrap();
            assert!(a < area);
            area = a;
        }
        let rho1 = cur.vertices[0].x;
        let rate = (rho1 - rho) / (20.0 * dt);
        let mid = 0.5 * (rho + rho1);
        assert!((rate + 1.0 / mid.tan()).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn isoperimetric_ratio_decreases_on_ellipse() {
        let s = SurfaceModel::flat_square(20.0);
        let v: Vec<Point> = (0..128)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 128.0;
                Point::new(2.0 * t.cos(), t.sin())
            })
            .collect();
        let mut c = DiscreteCurve::closed(v, Vec2::zeros()).unwrap();
        let ratio = |c: &DiscreteCurve| {
            let l = c.length(&s);
            l * l / (4.0 * PI * enclosed_area(&s, c).unwrap())
        };
        let mut prev = ratio(&c);
        for _ in 0..200 {
            c = csf_step(&s, &c, 0.5 * stability_bound(&s, &c)).unwrap();
            let r = ratio(&c);
            assert!(r <= prev + 1e-6);
            prev = r;
        }
    }

    #[test]
    fn path_of_unit_circle() {
        let s = SurfaceModel::flat_square(10.0);
        let c = circle(Point::new(0.0, 0.0), 1.0, 64);
        let path = csf_path_to_point(&s, &c, &FlowConfig::default()).unwrap();
        assert!(path.max_length <= c.length(&s) * (1.0 + 1e-6));
        assert_eq!(*path.lengths.last().unwrap(), 0.0);
        assert!(path.collapse_point.unwrap().norm() < 1e-6);
        let rev = path.reversed();
        assert_eq!(rev.lengths[0], 0.0);
    }

    #[test]
    fn sphere_cap_collapses_to_pole() {
        let s = SurfaceModel::sphere(1.0);
        let c = latitude(PI / 4.0, 64);
        let path = csf_path_to_point(&s, &c, &FlowConfig::default()).unwrap();
        assert!((path.max_length - c.length(&s)).abs() < 1e-12);
        assert!(path.areas.windows(2).all(|w| w[1] < w[0]));
        assert!(path.slices.last().unwrap().vertices[0].x < 0.05);
    }

    #[test]
    fn point_curve_is_trivial() {
        let s = SurfaceModel::flat_square(1.0);
        let c = DiscreteCurve::closed(vec![Point::new(0.5, 0.5); 8], Vec2::zeros()).unwrap();
        assert_eq!(csf_path_to_point(&s, &c, &FlowConfig::default()).unwrap().slices.len(), 1);
    }
}
