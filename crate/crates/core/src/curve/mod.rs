//! Discrete curves and regions, the functional `A^c`, and first and second variations.
//!
//! Vertices are stored in the universal cover of the chart. A closed curve carries the
//! period vector by which its last vertex wraps around to the first one (zero for a
//! contractible loop).

pub mod fixtures;
mod node;
mod region;
mod variation;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, SurfaceModel, Vec2};

pub use node::{detect_node, split_at_node, split_at_node_pinned, Configuration, NodeData};
pub use region::{ac_functional, area, Region};
pub use variation::{first_variation, second_variation, PerturbationFamily, TestFunction};

pub const MIN_VERTICES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveKind {
    /// Closed loop; the vertex after the last one is `vertices[0] + shift`.
    Closed { shift: Vec2 },
    /// Open path from the first to the last vertex.
    Pinned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCurve {
    pub vertices: Vec<Point>,
    pub kind: CurveKind,
}

impl DiscreteCurve {
    pub fn closed(vertices: Vec<Point>, shift: Vec2) -> Result<Self> {
        Self::check(&vertices)?;
        Ok(DiscreteCurve { vertices, kind: CurveKind::Closed { shift } })
    }

    pub fn pinned(vertices: Vec<Point>) -> Result<Self> {
        Self::check(&vertices)?;
        Ok(DiscreteCurve { vertices, kind: CurveKind::Pinned })
    }

    fn check(vertices: &[Point]) -> Result<()> {
        if vertices.len() < MIN_VERTICES {
            return Err(Error::Invalid(format!(
                "a curve needs at least {MIN_VERTICES} vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Invalid("non-finite vertex".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.kind, CurveKind::Closed { .. })
    }

    /// Closing period of a closed curve; zero for pinned curves.
    pub fn shift(&self) -> Vec2 {
        match self.kind {
            CurveKind::Closed { shift } => shift,
            CurveKind::Pinned => Vec2::zeros(),
        }
    }

    pub fn endpoints(&self) -> (Point, Point) {
        (self.vertices[0], *self.vertices.last().unwrap())
    }

    pub fn segment_count(&self) -> usize {
        if self.is_closed() {
            self.len()
        } else {
            self.len() - 1
        }
    }

    /// Vertex at any integer index, extended periodically for closed curves.
    pub fn vertex(&self, i: isize) -> Point {
        let n = self.len() as isize;
        let k = i.div_euclid(n);
        let r = i.rem_euclid(n) as usize;
        self.vertices[r] + self.shift() * k as f64
    }

    pub fn segment(&self, i: usize) -> (Point, Point) {
        (self.vertex(i as isize), self.vertex(i as isize + 1))
    }

    /// Point at fractional vertex parameter `t` (linear in the chart).
    pub fn point_at(&self, t: f64) -> Point {
        let i = t.floor();
        let u = t - i;
        let a = self.vertex(i as isize);
        if u == 0.0 {
            return a;
        }
        a + (self.vertex(i as isize + 1) - a) * u
    }

    pub fn segment_lengths(&self, surface: &SurfaceModel) -> Vec<f64> {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.segment(i);
                surface.chord_length(&a, &b)
            })
            .collect()
    }

    pub fn length(&self, surface: &SurfaceModel) -> f64 {
        self.segment_lengths(surface).iter().sum()
    }

    /// Discrete Dirichlet energy `N * sum(l_i^2)` for the uniform parameter on `[0, 1]`.
    pub fn dirichlet_energy(&self, surface: &SurfaceModel) -> f64 {
        let l = self.segment_lengths(surface);
        l.len() as f64 * l.iter().map(|x| x * x).sum::<f64>()
    }

    /// Arclength weight of every vertex (half of each adjacent segment).
    pub fn vertex_weights(&self, surface: &SurfaceModel) -> Vec<f64> {
        let l = self.segment_lengths(surface);
        let n = self.len();
        (0..n)
            .map(|i| {
                if self.is_closed() {
                    0.5 * (l[(i + n - 1) % n] + l[i])
                } else if i == 0 {
                    0.5 * l[0]
                } else if i == n - 1 {
                    0.5 * l[n - 2]
                } else {
                    0.5 * (l[i - 1] + l[i])
                }
            })
            .collect()
    }

    fn interior(&self, i: usize) -> bool {
        self.is_closed() || (i > 0 && i + 1 < self.len())
    }

    /// Geodesic tangents of the incoming and outgoing chords at vertex `i`.
    pub(crate) fn stencil(&self, surface: &SurfaceModel, i: usize) -> Result<(Vec2, Vec2, f64, f64)> {
        let x = self.vertex(i as isize);
        let p = self.vertex(i as isize - 1);
        let q = self.vertex(i as isize + 1);
        stencil_at(surface, &p, &x, &q).ok_or(Error::DegenerateVertex(i))
    }

    /// Signed turning angle at every vertex (zero at the ends of a pinned curve).
    pub fn turning_angles(&self, surface: &SurfaceModel) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| {
                if !self.interior(i) {
                    return Ok(0.0);
                }
                let x = self.vertex(i as isize);
                let (t_in, t_out, _, _) = self.stencil(surface, i)?;
                Ok(surface.signed_angle(&x, &t_in, &t_out))
            })
            .collect()
    }

    /// Geodesic curvature with respect to the left normal; positive when turning left.
    pub fn geodesic_curvature(&self, surface: &SurfaceModel) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| {
                if !self.interior(i) {
                    return Ok(0.0);
                }
                let x = self.vertex(i as isize);
                let (t_in, t_out, l_in, l_out) = self.stencil(surface, i)?;
                Ok(surface.signed_angle(&x, &t_in, &t_out) / (0.5 * (l_in + l_out)))
            })
            .collect()
    }

    /// Unit left normal (chart components) at every vertex.
    pub fn left_normals(&self, surface: &SurfaceModel) -> Result<Vec<Vec2>> {
        (0..self.len())
            .map(|i| {
                let x = self.vertex(i as isize);
                let t = if self.interior(i) {
                    let (t_in, t_out, _, _) = self.stencil(surface, i)?;
                    t_in / surface.norm(&x, &t_in) + t_out / surface.norm(&x, &t_out)
                } else if i == 0 {
                    self.vertex(1) - x
                } else {
                    x - self.vertex(i as isize - 1)
                };
                let n = surface.norm(&x, &t);
                if !(n > 0.0) {
                    return Err(Error::DegenerateVertex(i));
                }
                Ok(surface.rotate_left(&x, &(t / n)))
            })
            .collect()
    }

    /// Uniform metric-arclength resampling with `n` vertices (linear in the chart).
    pub fn resample(&self, surface: &SurfaceModel, n: usize) -> Result<DiscreteCurve> {
        let lengths = self.segment_lengths(surface);
        let total: f64 = lengths.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Invalid("cannot resample a curve of zero length".into()));
        }
        let slots = if self.is_closed() { n } else { n - 1 };
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        let mut acc = 0.0;
        for k in 0..n {
            let target = total * k as f64 / slots as f64;
            while seg + 1 < lengths.len() && acc + lengths[seg] < target {
                acc += lengths[seg];
                seg += 1;
            }
            let (a, b) = self.segment(seg);
            let u = if lengths[seg] > 0.0 { ((target - acc) / lengths[seg]).clamp(0.0, 1.0) } else { 0.0 };
            out.push(a + (b - a) * u);
        }
        if !self.is_closed() {
            out[n - 1] = *self.vertices.last().unwrap();
        }
        Ok(DiscreteCurve { vertices: out, kind: self.kind })
    }

    /// Ratio of the longest to the shortest segment.
    pub fn spacing_ratio(&self, surface: &SurfaceModel) -> f64 {
        let l = self.segment_lengths(surface);
        let max = l.iter().cloned().fold(0.0, f64::max);
        let min = l.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }

    pub fn reversed(&self) -> DiscreteCurve {
        let mut v = self.vertices.clone();
        match self.kind {
            CurveKind::Closed { shift } => {
                v.reverse();
                // The reversed loop starts at the old last vertex and wraps by -shift.
                DiscreteCurve { vertices: v, kind: CurveKind::Closed { shift: -shift } }
            }
            CurveKind::Pinned => {
                v.reverse();
                DiscreteCurve { vertices: v, kind: CurveKind::Pinned }
            }
        }
    }

    pub fn translated(&self, by: &Vec2) -> DiscreteCurve {
        DiscreteCurve { vertices: self.vertices.iter().map(|p| p + by).collect(), kind: self.kind }
    }

    /// Largest vertex displacement between two curves with equal vertex counts.
    pub fn max_displacement(&self, other: &DiscreteCurve) -> f64 {
        self.vertices.iter().zip(&other.vertices).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Sum of turning angles plus the curvature integral of the disk on the left.
    pub fn gauss_bonnet_sum(&self, surface: &SurfaceModel) -> Result<f64> {
        if !self.is_closed() {
            return Err(Error::Invalid("Gauss-Bonnet sum needs a closed curve".into()));
        }
        let turning: f64 = self.turning_angles(surface)?.iter().sum();
        let (_, curvature) = surface.loop_integrals(&self.vertices, &self.shift())?;
        Ok(turning + curvature)
    }
}

/// Incoming and outgoing geodesic tangents at `x` from the chords `p -> x -> q`.
pub(crate) fn stencil_at(surface: &SurfaceModel, p: &Point, x: &Point, q: &Point) -> Option<(Vec2, Vec2, f64, f64)> {
    let d_in = x - p;
    let d_out = q - x;
    let l_in = surface.chord_length(p, x);
    let l_out = surface.chord_length(x, q);
    if !(l_in > 0.0) || !(l_out > 0.0) {
        return None;
    }
    let t_in = d_in - surface.christoffel(x, &d_in, &d_in) * 0.5;
    let t_out = d_out + surface.christoffel(x, &d_out, &d_out) * 0.5;
    Some((t_in, t_out, l_in, l_out))
}

/// Outcome of comparing a curve with itself and its period translates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LiftContact {
    Embedded { min_gap: f64 },
    SelfTouching { location: Point },
    SelfCrossing { location: Point },
}

pub(crate) struct Contact {
    pub i: usize,
    pub j: usize,
    pub u: f64,
    pub v: f64,
    pub point: Point,
    pub gap: f64,
}

/// Closest approach between segments `a0 a1` and `b0 b1`, with the segment parameters.
pub(crate) fn segment_distance(a0: &Point, a1: &Point, b0: &Point, b1: &Point) -> (f64, f64, f64) {
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let cross = d1.x * d2.y - d1.y * d2.x;
    if cross.abs() > 1e-12 * d1.norm() * d2.norm() {
        let u = ((b0 - a0).x * d2.y - (b0 - a0).y * d2.x) / cross;
        let v = ((b0 - a0).x * d1.y - (b0 - a0).y * d1.x) / cross;
        if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) {
            return (0.0, u, v);
        }
    }
    let proj = |p: &Point, s0: &Point, d: &Vec2| -> f64 {
        let dd = d.norm_squared();
        if dd == 0.0 {
            0.0
        } else {
            ((p - s0).dot(d) / dd).clamp(0.0, 1.0)
        }
    };
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for (u, v) in [
        (0.0, proj(a0, b0, &d2)),
        (1.0, proj(a1, b0, &d2)),
        (proj(b0, a0, &d1), 0.0),
        (proj(b1, a0, &d1), 1.0),
    ] {
        let dist = ((a0 + d1 * u) - (b0 + d2 * v)).norm();
        if dist < best.0 {
            best = (dist, u, v);
        }
    }
    best
}

/// All pairs of non-adjacent segments (including period translates) closer than `tol`.
pub(crate) fn find_contacts(surface: &SurfaceModel, curve: &DiscreteCurve, tol: f64) -> (Vec<Contact>, f64) {
    let m = curve.segment_count();
    let mut lambdas = vec![Vec2::zeros()];
    lambdas.extend(surface.translates(2));
    let shift = curve.shift();
    let segs: Vec<(Point, Point)> = (0..m).map(|i| curve.segment(i)).collect();
    let bbox = |a: &Point, b: &Point| (a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y));
    let boxes: Vec<_> = segs.iter().map(|(a, b)| bbox(a, b)).collect();
    let mut contacts = Vec::new();
    let mut min_gap = f64::INFINITY;
    for lambda in &lambdas {
        let zero = lambda.norm() == 0.0;
        for i in 0..m {
            let (a0, a1) = segs[i];
            let ba = boxes[i];
            let start = if zero { i + 1 } else { 0 };
            for j in start..m {
                if zero && (j == i + 1 || (curve.is_closed() && i == 0 && j == m - 1 && shift.norm() == 0.0)) {
                    continue;
                }
                if !zero && i == j {
                    continue;
                }
                if curve.is_closed() {
                    // The closing segment meets the first one through the period shift.
                    let adjacent_wrap = (j == m - 1 && i == 0 && (lambda + shift).norm() < 1e-12)
                        || (i == m - 1 && j == 0 && (lambda - shift).norm() < 1e-12);
                    if adjacent_wrap {
                        continue;
                    }
                }
                let bb = boxes[j];
                if ba.0 > bb.1 + lambda.x + tol
                    || bb.0 + lambda.x > ba.1 + tol
                    || ba.2 > bb.3 + lambda.y + tol
                    || bb.2 + lambda.y > ba.3 + tol
                {
                    continue;
                }
                let (b0, b1) = (segs[j].0 + lambda, segs[j].1 + lambda);
                let (gap, u, v) = segment_distance(&a0, &a1, &b0, &b1);
                min_gap = min_gap.min(gap);
                if gap <= tol {
                    contacts.push(Contact { i, j, u, v, point: a0 + (a1 - a0) * u, gap });
                }
            }
        }
    }
    (contacts, min_gap)
}

/// Classifies how a curve meets itself and its period translates.
pub fn lift_contact(surface: &SurfaceModel, curve: &DiscreteCurve, tol: f64) -> Result<LiftContact> {
    let (contacts, min_gap) = find_contacts(surface, curve, tol);
    if contacts.is_empty() {
        return Ok(LiftContact::Embedded { min_gap });
    }
    for c in &contacts {
        if c.gap == 0.0 && branch_sine(surface, curve, c)?.abs() > 1e-6 {
            return Ok(LiftContact::SelfCrossing { location: c.point });
        }
    }
    Ok(LiftContact::SelfTouching { location: contacts[0].point })
}

/// Sine of the metric angle between the two branches of a contact.
pub(crate) fn branch_sine(surface: &SurfaceModel, curve: &DiscreteCurve, c: &Contact) -> Result<f64> {
    let ta = node::branch_tangent(surface, curve, c.i as f64 + c.u)?;
    let tb = node::branch_tangent(surface, curve, c.j as f64 + c.v)?;
    Ok(surface.signed_angle(&c.point, &ta, &tb).sin())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiftVerdict {
    Embeddable,
    NotEmbeddable,
}

/// Whether the circle of curvature `c` lifted to the plane avoids its lattice translates.
pub fn embedded_lift_check(surface: &SurfaceModel, c: f64) -> Result<LiftVerdict> {
    let SurfaceModel::FlatTorus(t) = surface else {
        return Err(Error::WrongFamily("flat torus"));
    };
    let w = t.shortest_vector();
    if c * c * w.norm_squared() > 4.0 {
        Ok(LiftVerdict::Embeddable)
    } else {
        Ok(LiftVerdict::NotEmbeddable)
    }
}
