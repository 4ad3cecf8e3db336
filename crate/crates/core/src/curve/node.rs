//! Detection and classification of a single self-intersection.

use serde::{Deserialize, Serialize};

use super::{find_contacts, stencil_at, DiscreteCurve};
use crate::error::{Error, Result};
use crate::geometry::{Point, SurfaceModel, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Configuration {
    /// The region meets the node in two opposite wedges that belong to different components.
    Config1,
    /// The region meets the node in two opposite wedges of a single component.
    Config2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeData {
    /// Lifted position of the node on the first passage.
    pub point: Point,
    /// Vertex parameters of the two passages, `t0 < t1`.
    pub t0: f64,
    pub t1: f64,
    /// Angle of the region wedges at the node, in `(0, pi]`.
    pub alpha: f64,
    pub config: Configuration,
    /// Lifted position at `t1` minus lifted position at `t0` (a period vector).
    pub shift: Vec2,
}

const TANGENCY_SINE: f64 = 1e-6;

/// Unit-free chart tangent of the curve at parameter `t`.
pub(crate) fn branch_tangent(surface: &SurfaceModel, curve: &DiscreteCurve, t: f64) -> Result<Vec2> {
    let r = t.round();
    let at_vertex = (t - r).abs() < 1e-12;
    if at_vertex {
        let i = r as isize;
        let n = curve.len() as isize;
        let interior = curve.is_closed() || (i > 0 && i < n - 1);
        if interior {
            let x = curve.vertex(i);
            if let Some((t_in, t_out, _, _)) = stencil_at(surface, &curve.vertex(i - 1), &x, &curve.vertex(i + 1)) {
                return Ok(t_in / surface.norm(&x, &t_in) + t_out / surface.norm(&x, &t_out));
            }
            return Err(Error::DegenerateVertex(i.rem_euclid(n) as usize));
        }
        return Ok(if i <= 0 { curve.vertex(1) - curve.vertex(0) } else { curve.vertex(i) - curve.vertex(i - 1) });
    }
    let i = t.floor() as isize;
    Ok(curve.vertex(i + 1) - curve.vertex(i))
}

fn normalize_param(t: f64, n: usize, closed: bool) -> f64 {
    let mut t = if closed { t.rem_euclid(n as f64) } else { t };
    if (t - t.round()).abs() < 1e-12 {
        t = t.round();
    }
    if closed && t >= n as f64 {
        t -= n as f64;
    }
    t
}

/// Finds the single self-intersection of a curve (with its period translates), if any.
///
/// The region is taken on the side toward which the first sub-loop bends, which is the
/// side of positive curvature for boundaries of curvature `c > 0`.
pub fn detect_node(surface: &SurfaceModel, curve: &DiscreteCurve) -> Result<Option<NodeData>> {
    let lengths: Vec<f64> = (0..curve.segment_count())
        .map(|i| {
            let (a, b) = curve.segment(i);
            (b - a).norm()
        })
        .collect();
    let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
    let tol = 1e-9 * mean.max(1e-300);
    let (contacts, _) = find_contacts(surface, curve, tol);
    if contacts.is_empty() {
        return Ok(None);
    }
    let mut lambdas = vec![Vec2::zeros()];
    lambdas.extend(surface.translates(2));
    let same_place = |p: &Point, q: &Point| lambdas.iter().any(|l| (p - q - l).norm() < 1e-6 * mean);
    let mut clusters: Vec<(Point, f64, f64)> = Vec::new();
    let n = curve.len();
    for c in &contacts {
        if clusters.iter().any(|(p, _, _)| same_place(p, &c.point)) {
            continue;
        }
        let ta = normalize_param(c.i as f64 + c.u, n, curve.is_closed());
        let tb = normalize_param(c.j as f64 + c.v, n, curve.is_closed());
        clusters.push((c.point, ta.min(tb), ta.max(tb)));
    }
    if clusters.len() > 1 {
        return Err(Error::MultipleNodes(clusters.len()));
    }
    let (_, t0, t1) = clusters[0];
    if t0 == t1 {
        return Err(Error::DegenerateVertex(t0 as usize));
    }
    let p0 = curve.point_at(t0);
    let p1 = curve.point_at(t1);
    // Both passages meet at the same surface point, so their lifts differ by a period.
    let raw = p1 - p0;
    let shift = lambdas
        .iter()
        .copied()
        .min_by(|u, v| (raw - u).norm().total_cmp(&(raw - v).norm()))
        .filter(|l| (raw - l).norm() < 1e-6 * mean)
        .unwrap_or(raw);
    let a = branch_tangent(surface, curve, t0)?;
    let b = -branch_tangent(surface, curve, t1)?;
    let angle = surface.signed_angle(&p0, &a, &b);
    if angle.sin().abs() < TANGENCY_SINE || !crosses(curve, t1, &a) {
        return Ok(Some(NodeData {
            point: p0,
            t0,
            t1,
            alpha: std::f64::consts::PI,
            config: Configuration::Config2,
            shift,
        }));
    }
    let turning = curve.turning_angles(surface)?;
    let bend: f64 = (0..n).filter(|&i| (i as f64) > t0 + 1e-9 && (i as f64) < t1 - 1e-9).map(|i| turning[i]).sum();
    if bend == 0.0 {
        return Err(Error::AmbiguousSide);
    }
    let theta = angle.abs();
    let (alpha, config) = if (angle > 0.0) == (bend > 0.0) {
        (theta, Configuration::Config1)
    } else {
        (std::f64::consts::PI - theta, Configuration::Config2)
    };
    Ok(Some(NodeData { point: p0, t0, t1, alpha, config, shift }))
}

/// Whether the branch through `t1` passes from one side of the branch through `t0` to
/// the other; a branch staying on one side only touches.
fn crosses(curve: &DiscreteCurve, t1: f64, tangent0: &Vec2) -> bool {
    let p1 = curve.point_at(t1);
    let (before, after) = if t1 == t1.round() { (t1 - 1.0, t1 + 1.0) } else { (t1.floor(), t1.ceil()) };
    let side = |t: f64| {
        let d = curve.point_at(t) - p1;
        tangent0.x * d.y - tangent0.y * d.x
    };
    side(before) * side(after) < 0.0
}

fn inner_vertices(curve: &DiscreteCurve, from: f64, to: f64) -> Vec<Point> {
    let start = (from + 1e-9).floor() as isize + 1;
    let end = (to - 1e-9).ceil() as isize - 1;
    (start..=end).map(|i| curve.vertex(i)).collect()
}

/// Splits a closed curve at its node into the two closed sub-loops.
pub fn split_at_node(curve: &DiscreteCurve, node: &NodeData) -> Result<(DiscreteCurve, DiscreteCurve)> {
    if !curve.is_closed() {
        return Err(Error::Invalid("only closed curves can be split at a node".into()));
    }
    let n = curve.len() as f64;
    let p0 = curve.point_at(node.t0);
    let p1 = curve.point_at(node.t1);
    let mut first = vec![p0];
    first.extend(inner_vertices(curve, node.t0, node.t1));
    let mut second = vec![p1];
    second.extend(inner_vertices(curve, node.t1, node.t0 + n));
    let first = DiscreteCurve::closed(first, node.shift)?;
    let second = DiscreteCurve::closed(second, curve.shift() - node.shift)?;
    Ok((first, second))
}

/// The two sub-loops as paths pinned at the node (start and end differ by their period).
pub fn split_at_node_pinned(curve: &DiscreteCurve, node: &NodeData) -> Result<(DiscreteCurve, DiscreteCurve)> {
    let (a, b) = split_at_node(curve, node)?;
    let close = |c: DiscreteCurve| -> Result<DiscreteCurve> {
        let mut v = c.vertices.clone();
        v.push(c.vertices[0] + c.shift());
        DiscreteCurve::pinned(v)
    };
    Ok((close(a)?, close(b)?))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn embedded_circle_has_no_node() {
        let s = SurfaceModel::flat_square(10.0);
        assert!(detect_node(&s, &circle(Point::new(0.0, 0.0), 1.0, 64)).unwrap().is_none());
    }

    #[test]
    fn lemniscate_node() {
        let s = SurfaceModel::flat_square(40.0);
        for alpha in [PI / 3.0, PI / 2.0, 2.0 * PI / 3.0] {
            let fx = lemniscate(1.0, alpha, 0.02);
            let node = detect_node(&s, &fx.curve).unwrap().unwrap();
            assert!(node.point.norm() < 1e-12);
            assert_eq!((node.t0, node.t1), (fx.node_vertices.0 as f64, fx.node_vertices.1 as f64));
            assert!((node.alpha - alpha).abs() < 1e-3);
            assert_eq!(node.config, Configuration::Config1);
        }
    }

    #[test]
    fn tangent_circles_touch() {
        let s = SurfaceModel::flat_square(40.0);
        let node = detect_node(&s, &tangent_circles(1.0, 64)).unwrap().unwrap();
        assert_eq!(node.alpha, PI);
        assert_eq!(node.config, Configuration::Config2);
    }

    #[test]
    fn torus_lens_is_config2() {
        let fx = torus_lens(1.0, PI / 2.0, 128);
        let node = detect_node(&fx.surface, &fx.curve).unwrap().unwrap();
        assert_eq!(node.config, Configuration::Config2);
        assert!((node.alpha - PI / 2.0).abs() < 0.05);
        assert!((node.shift - Vec2::new(fx.curve.shift().x / 2.0, 0.0)).norm() < 1e-12);
        let (a, b) = split_at_node(&fx.curve, &node).unwrap();
        assert_eq!(a.len() + b.len(), fx.curve.len());
    }

    #[test]
    fn two_crossings_reported() {
        let s = SurfaceModel::flat_square(40.0);
        // The rosette r = 1 + 1.5 cos(2t) crosses itself more than once.
        let v = (0..400)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 400.0;
                let r = 1.0 + 1.5 * (2.0 * t).cos();
                Point::new(r * t.cos(), r * t.sin())
            })
            .collect();
        let c = DiscreteCurve::closed(v, Vec2::zeros()).unwrap();
        assert!(matches!(detect_node(&s, &c), Err(Error::MultipleNodes(_))));
    }

    #[test]
    fn split_lemniscate() {
        let fx = lemniscate(1.0, PI / 2.0, 0.05);
        let s = SurfaceModel::flat_square(40.0);
        let node = detect_node(&s, &fx.curve).unwrap().unwrap();
        let (a, b) = split_at_node(&fx.curve, &node).unwrap();
        assert!((a.length(&s) - fx.lobe_length).abs() < 1e-2);
        assert!((b.length(&s) - fx.lobe_length).abs() < 1e-2);
        let (pa, _) = split_at_node_pinned(&fx.curve, &node).unwrap();
        assert_eq!(pa.endpoints().0, pa.endpoints().1);
    }
}
