//! Normal perturbations of boundary curves and the first and second variation of `A^c`.

use serde::{Deserialize, Serialize};

use super::{detect_node, Configuration, DiscreteCurve, NodeData, Region};
use crate::error::{Error, Result};
use crate::geometry::{IntegratorConfig, Point, SurfaceModel, TangentVector, Vec2, GL5};

/// Per-vertex values along a curve, interpolated linearly between vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub values: Vec<f64>,
}

impl TestFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("test function values must be finite".into()));
        }
        Ok(TestFunction { values })
    }

    pub fn constant(n: usize, value: f64) -> Self {
        TestFunction { values: vec![value; n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new((0..n).map(f).collect())
    }

    /// Value at fractional vertex parameter `t`, periodic in the vertex count.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.values.len();
        let i = t.floor();
        let u = t - i;
        let a = self.values[(i as isize).rem_euclid(n as isize) as usize];
        if u == 0.0 {
            return a;
        }
        let b = self.values[(i as isize + 1).rem_euclid(n as isize) as usize];
        a + (b - a) * u
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

/// Family `s -> exp(s * phi * N)` of normal perturbations of one boundary curve, where `N`
/// is the outward normal of the region.
#[derive(Clone, Debug)]
pub struct PerturbationFamily {
    pub base: DiscreteCurve,
    /// Normal speed along the outward normal, per vertex.
    pub phi: Vec<f64>,
    /// `+1` where the outward normal is the left normal, `-1` where it is the right normal.
    outward: Vec<f64>,
    normals: Vec<Vec2>,
    pub base_area: f64,
}

impl PerturbationFamily {
    /// Perturbation of a curve bounding a region of area `base_area` on its left (or right).
    pub fn new(
        surface: &SurfaceModel,
        base: DiscreteCurve,
        phi: Vec<f64>,
        region_on_left: bool,
        base_area: f64,
    ) -> Result<Self> {
        let sign = if region_on_left { -1.0 } else { 1.0 };
        let n = base.len();
        Self::build(surface, base, phi, vec![sign; n], base_area)
    }

    /// Perturbation of boundary curve `curve_index` of `region`.
    pub fn from_region(surface: &SurfaceModel, region: &Region, curve_index: usize, phi: Vec<f64>) -> Result<Self> {
        let base = region
            .boundary
            .get(curve_index)
            .ok_or_else(|| Error::Invalid(format!("region has no boundary curve {curve_index}")))?
            .clone();
        let outward = region.side_signs()[curve_index].iter().map(|s| -s).collect();
        Self::build(surface, base, phi, outward, region.area())
    }

    fn build(surface: &SurfaceModel, base: DiscreteCurve, phi: Vec<f64>, outward: Vec<f64>, base_area: f64) -> Result<Self> {
        if phi.len() != base.len() {
            return Err(Error::Invalid(format!("normal field has {} values for {} vertices", phi.len(), base.len())));
        }
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("normal field values must be finite".into()));
        }
        let normals = base.left_normals(surface)?;
        Ok(PerturbationFamily { base, phi, outward, normals, base_area })
    }

    /// The perturbed curve at step `s`.
    pub fn curve_at(&self, surface: &SurfaceModel, s: f64) -> Result<DiscreteCurve> {
        let cfg = IntegratorConfig::default();
        let vertices = self
            .base
            .vertices
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let amount = s * self.phi[i] * self.outward[i];
                if amount == 0.0 {
                    return Ok(*x);
                }
                surface.exp_unwrapped(&TangentVector { base: *x, components: self.normals[i] * amount }, &cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DiscreteCurve { vertices, kind: self.base.kind })
    }

    /// Metric area swept between the base curve and the curve at step `s`, counted
    /// positive where the sweep moves outward.
    pub fn swept_area(&self, surface: &SurfaceModel, s: f64) -> Result<f64> {
        let moved = self.curve_at(surface, s)?;
        let mut total = 0.0;
        for i in 0..self.base.segment_count() {
            let (x0, x1) = self.base.segment(i);
            let (y0, y1) = moved.segment(i);
            total += self.outward[i] * quad_area(surface, &x0, &x1, &y0, &y1);
        }
        Ok(total)
    }

    /// `length - c * (base area + swept area)` at step `s`.
    pub fn functional(&self, surface: &SurfaceModel, s: f64, c: f64) -> Result<f64> {
        let moved = self.curve_at(surface, s)?;
        Ok(moved.length(surface) - c * (self.base_area + self.swept_area(surface, s)?))
    }
}

/// Signed metric area of the bilinear patch spanned by segment `x0 x1` and its image `y0 y1`;
/// positive when the image lies to the left of the segment.
fn quad_area(surface: &SurfaceModel, x0: &Point, x1: &Point, y0: &Point, y1: &Point) -> f64 {
    let mut acc = 0.0;
    for (u, wu) in GL5 {
        for (v, wv) in GL5 {
            let bottom = x0 + (x1 - x0) * u;
            let top = y0 + (y1 - y0) * u;
            let q = bottom + (top - bottom) * v;
            let du = (x1 - x0) * (1.0 - v) + (y1 - y0) * v;
            let dv = (y0 - x0) * (1.0 - u) + (y1 - x1) * u;
            acc += wu * wv * surface.area_density(&q) * (du.x * dv.y - du.y * dv.x);
        }
    }
    acc
}

/// Discrete first variation `sum phi (k - c) ds` of `A^c` along the family.
pub fn first_variation(surface: &SurfaceModel, family: &PerturbationFamily, c: f64) -> Result<f64> {
    if family.phi.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    if family.base.is_closed() {
        if let Some(node) = detect_node(surface, &family.base)? {
            let n = family.base.len() as isize;
            for t in [node.t0, node.t1] {
                for i in [t.floor() as isize, t.ceil() as isize] {
                    let i = i.rem_euclid(n) as usize;
                    if family.phi[i] != 0.0 {
                        return Err(Error::NodeInSupport(i));
                    }
                }
            }
        }
    }
    let kappa = family.base.geodesic_curvature(surface)?;
    let weights = family.base.vertex_weights(surface);
    Ok((0..family.base.len())
        .map(|i| family.phi[i] * (-family.outward[i] * kappa[i] - c) * weights[i])
        .sum())
}

/// Discrete second variation `sum (phi')^2 ds - sum (K + c^2) phi^2 ds` plus the node term.
pub fn second_variation(
    surface: &SurfaceModel,
    curve: &DiscreteCurve,
    node: Option<&NodeData>,
    phi: &TestFunction,
    c: f64,
) -> Result<f64> {
    let n = curve.len();
    if phi.values.len() != n {
        return Err(Error::Invalid(format!("test function has {} values for {} vertices", phi.values.len(), n)));
    }
    let lengths = curve.segment_lengths(surface);
    let weights = curve.vertex_weights(surface);
    let mut total = 0.0;
    for (i, l) in lengths.iter().enumerate() {
        let d = phi.values[(i + 1) % n] - phi.values[i];
        if d != 0.0 {
            if !(*l > 0.0) {
                return Err(Error::DegenerateVertex(i));
            }
            total += d * d / l;
        }
    }
    for i in 0..n {
        let f = phi.values[i];
        if f != 0.0 {
            let x = curve.vertices[i];
            surface.check_chart(&x)?;
            total -= (surface.curvature(&x) + c * c) * f * f * weights[i];
        }
    }
    if let Some(node) = node {
        total += node_term(node, phi.value_at(node.t0), phi.value_at(node.t1), c)?;
    }
    Ok(total)
}

/// Boundary contribution of the node to the second variation.
pub fn node_term(node: &NodeData, phi0: f64, phi1: f64, c: f64) -> Result<f64> {
    let sin = node.alpha.sin();
    let cross = match node.config {
        Configuration::Config1 => 2.0 * phi0 * phi1,
        Configuration::Config2 => -2.0 * phi0 * phi1,
    };
    if sin.abs() < 1e-8 {
        // As alpha -> pi the Config-2 bracket tends to -(phi0 + phi1)^2, so the term stays
        // finite only when it vanishes.
        let scale = 1.0 + phi0.abs() + phi1.abs();
        if node.config == Configuration::Config2 && (phi0 + phi1).abs() <= 1e-12 * scale {
            return Ok(0.0);
        }
        return Err(Error::AngleDegenerate(node.alpha));
    }
    Ok(-(2.0 * c / sin) * ((phi0 * phi0 + phi1 * phi1) * node.alpha.cos() + cross))
}
