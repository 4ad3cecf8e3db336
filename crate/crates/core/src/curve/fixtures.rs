//! Reference curves with known geometry: circles, latitudes, a figure-eight and a torus lens.

use std::f64::consts::PI;

use super::DiscreteCurve;
use crate::geometry::{FlatTorus, Point, SurfaceModel, Vec2};

/// Counterclockwise chart circle with `n` vertices, starting at angle 0.
pub fn circle(center: Point, radius: f64, n: usize) -> DiscreteCurve {
    let v = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            center + Vec2::new(t.cos(), t.sin()) * radius
        })
        .collect();
    DiscreteCurve::closed(v, Vec2::zeros()).expect("valid circle")
}

/// Circle in the `(s, theta)` chart of a surface of revolution.
pub fn cylinder_circle(s0: f64, theta0: f64, radius: f64, n: usize) -> DiscreteCurve {
    circle(Point::new(s0, theta0), radius, n)
}

/// Latitude `s = rho` traversed with increasing angle; the pole cap lies on its left.
pub fn latitude(rho: f64, n: usize) -> DiscreteCurve {
    let v = (0..n).map(|k| Point::new(rho, 2.0 * PI * k as f64 / n as f64)).collect();
    DiscreteCurve::closed(v, Vec2::new(0.0, 2.0 * PI)).expect("valid latitude")
}

/// Geodesic circle of radius `rho` about `center` on the unit sphere, in the `(s, theta)`
/// chart. The first vertex lies in direction `start` from the center, measured from the
/// direction of increasing `s` toward increasing `theta`; `ccw` turns the same way.
/// Circles around a pole close up with period `(0, +-2 pi)`.
pub fn sphere_circle(center: Point, rho: f64, n: usize, start: f64, ccw: bool) -> DiscreteCurve {
    let (ss, cs) = center.x.sin_cos();
    let (st, ct) = center.y.sin_cos();
    let c3 = [ss * ct, ss * st, cs];
    let e_s = [cs * ct, cs * st, -ss];
    let e_t = [-st, ct, 0.0];
    let sign = if ccw { 1.0 } else { -1.0 };
    let at = |phi: f64| -> (f64, f64) {
        let q: Vec<f64> =
            (0..3).map(|k| c3[k] * rho.cos() + (e_s[k] * phi.cos() + e_t[k] * phi.sin()) * rho.sin()).collect();
        (q[2].clamp(-1.0, 1.0).acos(), q[1].atan2(q[0]))
    };
    let unwrap = |theta: f64, prev: f64| theta + 2.0 * PI * ((prev - theta) / (2.0 * PI)).round();
    let mut v: Vec<Point> = Vec::with_capacity(n);
    let mut prev = center.y;
    for k in 0..=n {
        let (s, theta) = at(start + sign * 2.0 * PI * k as f64 / n as f64);
        let theta = unwrap(theta, prev);
        prev = theta;
        v.push(Point::new(s, theta));
    }
    let end = v.pop().expect("n + 1 points");
    let shift = Vec2::new(0.0, 2.0 * PI * ((end.y - v[0].y) / (2.0 * PI)).round());
    DiscreteCurve::closed(v, shift).expect("valid circle")
}

/// Planar figure-eight with a transversal node at the origin.
#[derive(Clone, Debug)]
pub struct Lemniscate {
    pub curve: DiscreteCurve,
    /// Vertex indices of the two passages through the node.
    pub node_vertices: (usize, usize),
    /// One interior point per lobe.
    pub witnesses: [Point; 2],
    pub alpha: f64,
    pub c: f64,
    pub lobe_length: f64,
}

/// Figure-eight whose lobes are a circular arc of radius `1/c` joined to the node by two
/// straight legs; the branches cross at angle `alpha` and the lobes have curvature `c`
/// toward their interiors along the arcs. Vertices are spaced about `spacing` apart.
pub fn lemniscate(c: f64, alpha: f64, spacing: f64) -> Lemniscate {
    let radius = 1.0 / c;
    let half = alpha / 2.0;
    let leg = radius / half.tan();
    let arc = radius * (PI + alpha);
    let n_leg = ((leg / spacing).round() as usize).max(2);
    let n_arc = ((arc / spacing).round() as usize).max(8);
    let out_dir = Vec2::new(half.cos(), -half.sin());
    let center = Point::new(radius / half.sin(), 0.0);
    let mut lobe = Vec::with_capacity(2 * n_leg + n_arc);
    for k in 0..n_leg {
        lobe.push(out_dir * (leg * k as f64 / n_leg as f64));
    }
    let start_angle = -half - PI / 2.0;
    for k in 0..n_arc {
        let a = start_angle + (PI + alpha) * k as f64 / n_arc as f64;
        lobe.push(center + Vec2::new(a.cos(), a.sin()) * radius);
    }
    let back_dir = Vec2::new(half.cos(), half.sin());
    for k in 0..n_leg {
        lobe.push(back_dir * (leg * (n_leg - k) as f64 / n_leg as f64));
    }
    let m = lobe.len();
    let mut vertices = lobe.clone();
    vertices.extend(lobe.iter().map(|p| Point::new(-p.x, p.y)));
    Lemniscate {
        curve: DiscreteCurve::closed(vertices, Vec2::zeros()).expect("valid lemniscate"),
        node_vertices: (0, m),
        witnesses: [center, Point::new(-center.x, 0.0)],
        alpha,
        c,
        lobe_length: 2.0 * leg + arc,
    }
}

/// Two arcs of curvature `c` on a flat torus, both joining `x0` to `x0 + w`.
#[derive(Clone, Debug)]
pub struct TorusLens {
    pub surface: SurfaceModel,
    pub curve: DiscreteCurve,
    pub node_vertices: (usize, usize),
    pub alpha: f64,
    pub c: f64,
    /// Length of each arc.
    pub arc_length: f64,
}

/// Lens whose arcs meet at angle `alpha`; `w` is the shortest lattice vector.
/// The curve runs along the first arc and then along the translate of the second one,
/// so it closes up with period `2 w` and crosses itself once on the torus.
pub fn torus_lens(c: f64, alpha: f64, per_arc: usize) -> TorusLens {
    let radius = 1.0 / c;
    let half = alpha / 2.0;
    let width = 2.0 * radius * half.sin();
    let height = (4.0 * width).max(4.0 * radius);
    let lattice = FlatTorus::new(Vec2::new(width, 0.0), Vec2::new(0.0, height)).expect("valid lattice");
    let w = Vec2::new(width, 0.0);
    let first_center = Point::new(width / 2.0, -radius * half.cos());
    let second_center = Point::new(1.5 * width, radius * half.cos());
    let mut vertices = Vec::with_capacity(2 * per_arc);
    for k in 0..per_arc {
        let a = PI / 2.0 + half - alpha * k as f64 / per_arc as f64;
        vertices.push(first_center + Vec2::new(a.cos(), a.sin()) * radius);
    }
    for k in 0..per_arc {
        let a = -PI / 2.0 - half + alpha * k as f64 / per_arc as f64;
        vertices.push(second_center + Vec2::new(a.cos(), a.sin()) * radius);
    }
    vertices[0] = Point::new(0.0, 0.0);
    vertices[per_arc] = Point::new(width, 0.0);
    TorusLens {
        surface: SurfaceModel::FlatTorus(lattice),
        curve: DiscreteCurve::closed(vertices, w * 2.0).expect("valid lens"),
        node_vertices: (0, per_arc),
        alpha,
        c,
        arc_length: radius * alpha,
    }
}

/// A circle of radius `2 r` followed by an internally tangent circle of radius `r`,
/// both starting at their common point.
pub fn tangent_circles(r: f64, n: usize) -> DiscreteCurve {
    let big = circle(Point::new(0.0, 0.0), 2.0 * r, 2 * n);
    let small = circle(Point::new(r, 0.0), r, n);
    let mut v = big.vertices;
    v.extend(small.vertices);
    DiscreteCurve::closed(v, Vec2::zeros()).expect("valid curve")
}
