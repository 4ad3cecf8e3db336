//! Fixed-endpoint Birkhoff curve shortening on pinned curves.

use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::geometry::{solve_geodesic, GeodesicSegment, Point, SurfaceModel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffConfig {
    /// Number of interior breaks; the map uses `2 * breaks + 2` parameter intervals.
    pub breaks: usize,
    /// Cap on the length of every replacement geodesic.
    pub r0: f64,
    /// Tolerance of the geodesic two-point problems.
    pub tol: f64,
}

impl BirkhoffConfig {
    /// Smallest break count for which the even break points of `curve` are within `r0`.
    pub fn for_curve(surface: &SurfaceModel, curve: &DiscreteCurve, r0: f64) -> Self {
        let length = curve.length(surface);
        let mut pieces = ((1.25 * length / r0).ceil() as usize).max(1);
        loop {
            let cfg = BirkhoffConfig { breaks: pieces - 1, r0, tol: 1e-12 };
            let pts = even_breaks(curve, cfg.breaks);
            let worst = pts.windows(2).map(|w| surface.chord_length(&w[0], &w[1])).fold(0.0, f64::max);
            if worst <= r0 || pieces > 4 * curve.len() {
                return cfg;
            }
            pieces *= 2;
        }
    }
}

/// Point of a pinned curve at uniform vertex parameter `tau` in `[0, 1]`.
fn at_parameter(curve: &DiscreteCurve, tau: f64) -> Point {
    let last = (curve.len() - 1) as f64;
    if tau >= 1.0 {
        return curve.vertices[curve.len() - 1];
    }
    curve.point_at(tau * last)
}

fn even_breaks(curve: &DiscreteCurve, breaks: usize) -> Vec<Point> {
    let intervals = 2 * breaks + 2;
    (0..=breaks + 1).map(|j| at_parameter(curve, (2 * j) as f64 / intervals as f64)).collect()
}

/// Concatenation of geodesic pieces, parametrized by arclength.
#[derive(Clone, Debug)]
pub struct BrokenGeodesic {
    pub pieces: Vec<GeodesicSegment>,
    cumulative: Vec<f64>,
}

impl BrokenGeodesic {
    /// Geodesics through consecutive `nodes`, each no longer than `cap`.
    pub fn through(surface: &SurfaceModel, nodes: &[Point], cap: f64, tol: f64) -> Result<Self> {
        let mut pieces = Vec::with_capacity(nodes.len() - 1);
        let mut cumulative = vec![0.0];
        for w in nodes.windows(2) {
            let chord = surface.chord_length(&w[0], &w[1]);
            if chord > cap {
                return Err(Error::SegmentTooLong { length: chord, cap });
            }
            let g = solve_geodesic(surface, &w[0], &w[1], tol)?;
            cumulative.push(cumulative.last().unwrap() + g.length);
            pieces.push(g);
        }
        Ok(BrokenGeodesic { pieces, cumulative })
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn point_at_arclength(&self, surface: &SurfaceModel, s: f64) -> Result<Point> {
        let total = self.length();
        if s <= 0.0 {
            return Ok(self.pieces[0].start);
        }
        if s >= total {
            return Ok(self.pieces.last().unwrap().end);
        }
        let j = self.cumulative.partition_point(|c| *c <= s).saturating_sub(1).min(self.pieces.len() - 1);
        let piece = &self.pieces[j];
        if piece.length == 0.0 {
            return Ok(piece.start);
        }
        piece.point_at(surface, (s - self.cumulative[j]) / piece.length)
    }

    /// `n` points at uniform arclength, both ends included.
    pub fn sample_uniform(&self, surface: &SurfaceModel, n: usize) -> Result<Vec<Point>> {
        let total = self.length();
        (0..n).map(|k| self.point_at_arclength(surface, total * k as f64 / (n - 1) as f64)).collect()
    }
}

/// One application of the Birkhoff map to a pinned curve.
///
/// Even break points are joined by minimizing geodesics, the result is reparametrized at
/// constant speed, the odd break points are joined the same way, and the output is
/// sampled at constant speed with the input's vertex count.
pub fn birkhoff_map(surface: &SurfaceModel, curve: &DiscreteCurve, cfg: &BirkhoffConfig) -> Result<DiscreteCurve> {
    if curve.is_closed() {
        return Err(Error::Invalid("the Birkhoff map acts on pinned curves".into()));
    }
    let intervals = 2 * cfg.breaks + 2;
    let even = even_breaks(curve, cfg.breaks);
    let first = BrokenGeodesic::through(surface, &even, cfg.r0, cfg.tol)?;
    let total = first.length();
    let mut odd = vec![curve.vertices[0]];
    for j in 0..=cfg.breaks {
        odd.push(first.point_at_arclength(surface, total * (2 * j + 1) as f64 / intervals as f64)?);
    }
    odd.push(*curve.vertices.last().unwrap());
    let second = BrokenGeodesic::through(surface, &odd, cfg.r0, cfg.tol)?;
    let mut vertices = second.sample_uniform(surface, curve.len())?;
    vertices[0] = curve.vertices[0];
    let last = vertices.len() - 1;
    vertices[last] = *curve.vertices.last().unwrap();
    DiscreteCurve::pinned(vertices)
}
