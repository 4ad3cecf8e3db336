//! Corner rounding inside small metric balls and constant-curvature arcs.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::criteria::{isoperimetric_eta, r0};
use crate::curve::{DiscreteCurve, NodeData};
use crate::error::{Error, Result};
use crate::geometry::{solve_geodesic, Point, SurfaceModel, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "c", rename_all = "snake_case")]
pub enum RoundingMode {
    /// Replace the corner by the minimizing geodesic chord.
    Geodesic,
    /// Replace the corner by an arc of constant curvature `c` bending toward the corner.
    CurvatureAtLeast(f64),
}

/// Radius below which balls are uniquely geodesic, strictly `c`-convex and of area at most
/// the isoperimetric scale `eta`, halved.
///
/// With `c = 0` only the convexity radius of the curvature bound is used.
pub fn surgery_scale(surface: &SurfaceModel, c: f64) -> f64 {
    let stats = surface.surface_stats();
    let max_k = stats.max_k.value;
    let convex = if c > 0.0 {
        r0(c, max_k).unwrap_or(f64::INFINITY)
    } else if max_k > 0.0 {
        std::f64::consts::FRAC_PI_2 / max_k.sqrt()
    } else {
        f64::INFINITY
    };
    let mut scale = 0.5 * stats.inj.value.min(convex);
    if c > 0.0 {
        scale = scale.min((isoperimetric_eta(surface, c).eta / std::f64::consts::PI).sqrt());
    }
    scale
}

/// Parameter where the curve leaves the chord-metric ball of radius `r` around the point
/// at parameter `t0`, walking in direction `dir` (`+1` or `-1`).
pub(crate) fn exit_parameter(surface: &SurfaceModel, curve: &DiscreteCurve, t0: f64, r: f64, dir: f64) -> Result<f64> {
    exit_parameter_about(surface, curve, t0, &curve.point_at(t0), r, dir)
}

/// As [`exit_parameter`] for a ball centered at `x0`, which must contain the point at `t0`.
pub(crate) fn exit_parameter_about(surface: &SurfaceModel, curve: &DiscreteCurve, t0: f64, x0: &Point, r: f64, dir: f64) -> Result<f64> {
    let x0 = *x0;
    let n = curve.len() as isize;
    let mut prev = t0;
    let mut k = if dir > 0.0 { t0.floor() as isize + 1 } else { t0.ceil() as isize - 1 };
    for _ in 0..n {
        if !curve.is_closed() && (k < 0 || k >= n) {
            break;
        }
        let t = k as f64;
        if surface.chord_length(&x0, &curve.point_at(t)) >= r {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if surface.chord_length(&x0, &curve.point_at(mid)) >= r {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        prev = t;
        k += dir as isize;
    }
    Err(Error::ScaleTooLarge { r, r_c: f64::NAN })
}

/// Replaces the part of the curve inside the ball of radius `r` around the corner at
/// parameter `node.t0`.
pub fn round_corner(
    surface: &SurfaceModel,
    curve: &DiscreteCurve,
    node: &NodeData,
    r: f64,
    mode: RoundingMode,
) -> Result<DiscreteCurve> {
    if r <= 0.0 || node.alpha >= std::f64::consts::PI - 1e-12 {
        return Ok(curve.clone());
    }
    let t0 = node.t0;
    let corner = t0.round() as usize % curve.len();
    let turning = curve.turning_angles(surface)?[corner];
    let interior = std::f64::consts::PI - turning.abs();
    let c = match mode {
        RoundingMode::Geodesic => 0.0,
        RoundingMode::CurvatureAtLeast(c) => c,
    };
    let mut cap = surgery_scale(surface, c);
    if c > 0.0 {
        cap = cap.min((interior / 2.0).tan().recip() / c);
    }
    if r > cap {
        return Err(Error::ScaleTooLarge { r, r_c: cap });
    }
    let ta = exit_parameter(surface, curve, t0, r, -1.0).map_err(|_| Error::ScaleTooLarge { r, r_c: cap })?;
    let tb = exit_parameter(surface, curve, t0, r, 1.0).map_err(|_| Error::ScaleTooLarge { r, r_c: cap })?;
    let a = curve.point_at(ta);
    let b = curve.point_at(tb);
    let spacing = curve.length(surface) / curve.segment_count() as f64;
    let pieces = ((surface.chord_length(&a, &b) / spacing).round() as usize).max(2);
    let inserted = match mode {
        RoundingMode::Geodesic => solve_geodesic(surface, &a, &b, 1e-13)?.sample(surface, pieces)?,
        RoundingMode::CurvatureAtLeast(c) => constant_curvature_arc(surface, &a, &b, c * turning.signum(), pieces)?,
    };
    let mut vertices = inserted;
    if curve.is_closed() {
        let n = curve.len() as f64;
        let start = tb.floor() as isize + 1;
        let end = (ta + n).ceil() as isize - 1;
        vertices.extend((start..=end).map(|i| curve.vertex(i)));
        DiscreteCurve::closed(vertices, curve.shift())
    } else {
        let mut out: Vec<Point> = (0..=(ta.ceil() as isize - 1)).map(|i| curve.vertex(i)).collect();
        out.extend(vertices);
        out.extend(((tb.floor() as isize + 1)..curve.len() as isize).map(|i| curve.vertex(i)));
        DiscreteCurve::pinned(out)
    }
}

fn arc_rhs(surface: &SurfaceModel, kappa: f64, x: &Point, t: &Vec2) -> (Vec2, Vec2) {
    (*t, -surface.christoffel(x, t, t) + surface.rotate_left(x, t) * kappa)
}

/// Integrates the unit-speed curve of left curvature `kappa` for arclength `length`.
fn integrate_arc(surface: &SurfaceModel, kappa: f64, x: Point, t: Vec2, length: f64, steps: usize) -> Vec<(Point, Vec2)> {
    let h = length / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut x, mut t) = (x, t);
    out.push((x, t));
    for _ in 0..steps {
        let (k1x, k1t) = arc_rhs(surface, kappa, &x, &t);
        let (k2x, k2t) = arc_rhs(surface, kappa, &(x + k1x * (h / 2.0)), &(t + k1t * (h / 2.0)));
        let (k3x, k3t) = arc_rhs(surface, kappa, &(x + k2x * (h / 2.0)), &(t + k2t * (h / 2.0)));
        let (k4x, k4t) = arc_rhs(surface, kappa, &(x + k3x * h), &(t + k3t * h));
        x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
        t += (k1t + k2t * 2.0 + k3t * 2.0 + k4t) * (h / 6.0);
        out.push((x, t));
    }
    out
}

/// `pieces + 1` points of the short arc of left curvature `kappa` from `a` to `b`.
pub fn constant_curvature_arc(surface: &SurfaceModel, a: &Point, b: &Point, kappa: f64, pieces: usize) -> Result<Vec<Point>> {
    let chord = surface.chord_length(a, b);
    if chord == 0.0 {
        return Err(Error::Invalid("arc endpoints coincide".into()));
    }
    if (kappa * chord / 2.0).abs() >= 1.0 {
        return Err(Error::Invalid(format!("no arc of curvature {kappa} spans a chord of length {chord}")));
    }
    let half = (kappa * chord / 2.0).asin();
    let mut length = if kappa == 0.0 { chord } else { 2.0 * half / kappa };
    let d = b - a;
    let unit = d / surface.norm(a, &d);
    // Rotate the chord direction by -half in the metric.
    let mut angle = 0.0;
    let direction = |angle: f64| -> Vec2 {
        let base = unit * (angle - half).cos() + surface.rotate_left(a, &unit) * (angle - half).sin();
        base / surface.norm(a, &base)
    };
    let steps = (pieces * 8).max(64);
    let endpoint = |angle: f64, length: f64| integrate_arc(surface, kappa, *a, direction(angle), length, steps).last().unwrap().0;
    for _ in 0..50 {
        let hit = endpoint(angle, length);
        let res = hit - b;
        if res.norm() < 1e-13 * (1.0 + a.norm()) {
            break;
        }
        let eps = 1e-7;
        let ja = (endpoint(angle + eps, length) - hit) / eps;
        let jl = (endpoint(angle, length + eps * length) - hit) / (eps * length);
        let jac = Matrix2::from_columns(&[ja, jl]);
        let step = jac
            .try_inverse()
            .ok_or_else(|| Error::GeodesicSubproblemFailure("singular arc shooting Jacobian".into()))?
            * (-res);
        angle += step.x;
        length += step.y;
    }
    let sub = steps / pieces;
    let path = integrate_arc(surface, kappa, *a, direction(angle), length, sub * pieces);
    let mut out: Vec<Point> = (0..=pieces).map(|k| path[k * sub].0).collect();
    if (out[pieces] - b).norm() > 1e-8 * (1.0 + b.norm()) {
        return Err(Error::GeodesicSubproblemFailure("arc shooting did not reach the endpoint".into()));
    }
    out[pieces] = *b;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Configuration;
    use std::f64::consts::PI;

    /// Square with side 2 traversed counterclockwise; corner at vertex 0.
    fn square(per_side: usize) -> DiscreteCurve {
        let corners = [Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(2.0, 2.0), Point::new(0.0, 2.0)];
        let mut v = Vec::new();
        for k in 0..4 {
            let (p, q) = (corners[k], corners[(k + 1) % 4]);
            for i in 0..per_side {
                v.push(p + (q - p) * (i as f64 / per_side as f64));
            }
        }
        DiscreteCurve::closed(v, Vec2::zeros()).unwrap()
    }

    fn corner_node(alpha: f64) -> NodeData {
        NodeData { point: Point::new(0.0, 0.0), t0: 0.0, t1: 0.0, alpha, config: Configuration::Config1, shift: Vec2::zeros() }
    }

    #[test]
    fn chord_rounding_of_right_angle() {
        let s = SurfaceModel::flat_square(10.0);
        let c = square(40);
        let r = 0.3;
        let out = round_corner(&s, &c, &corner_node(PI / 2.0), r, RoundingMode::Geodesic).unwrap();
        let drop = c.length(&s) - out.length(&s);
        assert!((drop - (2.0 * r - r * 2f64.sqrt())).abs() < 1e-4, "drop {drop}");
    }

    #[test]
    fn arc_rounding_of_right_angle() {
        let s = SurfaceModel::flat_square(10.0);
        let c = square(40);
        let (r, k) = (0.3, 1.0);
        let out = round_corner(&s, &c, &corner_node(PI / 2.0), r, RoundingMode::CurvatureAtLeast(k)).unwrap();
        let chord = r * 2f64.sqrt();
        let arc = 2.0 / k * (k * chord / 2.0).asin();
        let drop = c.length(&s) - out.length(&s);
        assert!((drop - (2.0 * r - arc)).abs() < 1e-4, "drop {drop}");
        let kappa = out.geodesic_curvature(&s).unwrap();
        for kv in &kappa[1..7] {
            assert!(*kv >= k - 1e-3, "{kv}");
        }
    }

    #[test]
    fn tangential_node_is_noop() {
        let s = SurfaceModel::flat_square(10.0);
        let c = square(10);
        assert_eq!(round_corner(&s, &c, &corner_node(PI), 0.2, RoundingMode::Geodesic).unwrap(), c);
    }

    #[test]
    fn oversized_radius_rejected() {
        let s = SurfaceModel::flat_square(1.0);
        let c = square(10).translated(&Vec2::new(-1.0, -1.0));
        let err = round_corner(&s, &c, &corner_node(PI / 2.0), 0.4, RoundingMode::CurvatureAtLeast(4.0));
        assert!(matches!(err, Err(Error::ScaleTooLarge { .. })));
    }

    #[test]
    fn sphere_arc_has_requested_curvature() {
        let s = SurfaceModel::sphere(1.0);
        let a = Point::new(1.0, 0.2);
        let b = Point::new(1.2, 0.5);
        let pts = constant_curvature_arc(&s, &a, &b, 2.0, 40).unwrap();
        let curve = DiscreteCurve::pinned(pts).unwrap();
        for k in &curve.geodesic_curvature(&s).unwrap()[1..39] {
            assert!((k - 2.0).abs() < 1e-3, "{k}");
        }
    }
}
