//! Cut-and-paste surgery of a region at a transversal Config-1 node.
//!
//! Inside a small ball around the node the boundary consists of four arcs. The minus
//! surgery cuts off both region wedges with arcs of curvature `c` toward the region and
//! separates the two lobes; the plus surgery fills in the two complementary wedges with
//! geodesic chords and merges the lobes into a single loop.

use serde::{Deserialize, Serialize};

use crate::curve::{
    ac_functional, segment_distance, split_at_node, Configuration, DiscreteCurve, NodeData, PerturbationFamily, Region,
    TestFunction,
};
use crate::error::{Error, Result};
use crate::geometry::{solve_geodesic, Point, SurfaceModel, Vec2};
use crate::shortening::{constant_curvature_arc, enclosed_area, exit_parameter_about, surgery_scale};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurgerySign {
    /// Geodesic chords across the complementary wedges; the lobes merge.
    Plus,
    /// Arcs of curvature `c` across the region wedges; the lobes separate.
    Minus,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurgeryResult {
    pub sign: SurgerySign,
    pub s: f64,
    pub r: f64,
    /// Region after surgery.
    pub region: Region,
    /// `A^c` of the perturbed region before surgery.
    pub perturbed_ac: f64,
    pub ac: f64,
    /// `perturbed_ac - ac`.
    pub decrease: f64,
    /// The surgery strictly lowered `A^c`.
    pub decreases: bool,
    /// Boundary points on the sphere of radius `r`, counterclockwise around the node
    /// starting where the first lobe leaves the ball.
    pub ball_points: [Point; 4],
    /// Radius around the ball center containing the overlap of the perturbed lobes.
    pub overlap: f64,
}

/// Vertices strictly between parameters `from` and `to`.
fn inner(curve: &DiscreteCurve, from: f64, to: f64) -> Vec<Point> {
    let start = (from + 1e-9).floor() as isize + 1;
    let end = (to - 1e-9).ceil() as isize - 1;
    (start..=end).map(|i| curve.vertex(i)).collect()
}

/// Chord distance from the node over which each of the four half-branches moves away
/// monotonically.
fn feature_size(surface: &SurfaceModel, curve: &DiscreteCurve, node: &NodeData) -> f64 {
    let n = curve.len() as isize;
    let mut feature = f64::INFINITY;
    for t in [node.t0, node.t1] {
        let center = curve.point_at(t);
        for dir in [-1isize, 1] {
            let mut k = if dir > 0 { t.floor() as isize + 1 } else { t.ceil() as isize - 1 };
            let mut best = 0.0;
            for _ in 0..n {
                let d = surface.chord_length(&center, &curve.vertex(k));
                if d <= best {
                    break;
                }
                best = d;
                k += dir;
            }
            feature = feature.min(best);
        }
    }
    feature
}

/// Largest admissible surgery radius: the surgery scale of the surface, capped by a
/// quarter of the distance over which the branches leave the node monotonically.
pub fn surgery_radius(surface: &SurfaceModel, curve: &DiscreteCurve, node: &NodeData, c: f64) -> f64 {
    surgery_scale(surface, c).min(0.25 * feature_size(surface, curve, node))
}

type Bbox = (f64, f64, f64, f64);

fn bbox(points: &[Point]) -> Bbox {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |b, p| {
        (b.0.min(p.x), b.1.max(p.x), b.2.min(p.y), b.3.max(p.y))
    })
}

fn boxes_meet(a: &Bbox, b: &Bbox, lambda: &Vec2, tol: f64) -> bool {
    a.0 <= b.1 + lambda.x + tol && b.0 + lambda.x <= a.1 + tol && a.2 <= b.3 + lambda.y + tol && b.2 + lambda.y <= a.3 + tol
}

/// Closest approaches within `tol` between segments of loop `a` and of loop `b` or one of
/// its period translates, as (gap, point on `a`).
fn close_pairs(surface: &SurfaceModel, a: &DiscreteCurve, b: &DiscreteCurve, tol: f64) -> Vec<(f64, Point)> {
    let mut lambdas = vec![Vec2::zeros()];
    lambdas.extend(surface.translates(2));
    let segs = |c: &DiscreteCurve| -> Vec<(Point, Point, Bbox)> {
        (0..c.segment_count())
            .map(|i| {
                let (p, q) = c.segment(i);
                (p, q, bbox(&[p, q]))
            })
            .collect()
    };
    let (sa, sb) = (segs(a), segs(b));
    let whole_a = bbox(&a.vertices.iter().chain(std::iter::once(&(a.vertices[0] + a.shift()))).copied().collect::<Vec<_>>());
    let whole_b = bbox(&b.vertices.iter().chain(std::iter::once(&(b.vertices[0] + b.shift()))).copied().collect::<Vec<_>>());
    let mut out = Vec::new();
    for lambda in lambdas.iter().filter(|l| boxes_meet(&whole_a, &whole_b, l, tol)) {
        for (a0, a1, ba) in &sa {
            for (b0, b1, bb) in &sb {
                if !boxes_meet(ba, bb, lambda, tol) {
                    continue;
                }
                let (gap, u, _) = segment_distance(a0, a1, &(b0 + lambda), &(b1 + lambda));
                if gap <= tol {
                    out.push((gap, a0 + (a1 - a0) * u));
                }
            }
        }
    }
    out
}

/// Whether two closed loops (with period translates) come within `tol` of each other.
fn loops_touch(surface: &SurfaceModel, a: &DiscreteCurve, b: &DiscreteCurve, tol: f64) -> bool {
    !close_pairs(surface, a, b, tol).is_empty()
}

fn angle_about(center: &Point, p: &Point) -> f64 {
    let d = p - center;
    d.y.atan2(d.x)
}

/// One sub-loop of the boundary at the node, as a closed loop starting at its corner.
struct Lobe {
    curve: DiscreteCurve,
    /// Side of the region: `+1` on the left, `-1` on the right.
    sigma: f64,
    /// `A^c` of the disk bounded by the lobe.
    ac: f64,
}

/// Splits the boundary at the node and moves each lobe by `s * phi` along its outward
/// normal. The corners move independently, so for `s > 0` the lobes may overlap near the
/// node; the overlap is counted with multiplicity in the returned `A^c`.
fn perturbed_lobes(surface: &SurfaceModel, region: &Region, node: &NodeData, phi: &TestFunction, s: f64, c: f64) -> Result<[Lobe; 2]> {
    let curve = &region.boundary[0];
    let n = curve.len();
    if phi.values.len() != n {
        return Err(Error::Invalid(format!("test function has {} values for {n} vertices", phi.values.len())));
    }
    let (first, second) = split_at_node(curve, node)?;
    let lobe = |base: DiscreteCurve, from: f64| -> Result<Lobe> {
        let start = (from + 1e-9).floor() as usize + 1;
        let params: Vec<f64> = std::iter::once(from).chain((0..base.len() - 1).map(|k| (start + k) as f64)).collect();
        let sigma = region.side_signs()[0][(start + base.len() / 2) % n];
        let values: Vec<f64> = params.iter().map(|t| phi.value_at(t.rem_euclid(n as f64))).collect();
        let area = enclosed_area(surface, &base)?;
        let family = PerturbationFamily::new(surface, base, values, sigma > 0.0, area)?;
        let moved = if s == 0.0 { family.base.clone() } else { family.curve_at(surface, s)? };
        let ac = family.functional(surface, s, c)?;
        Ok(Lobe { curve: moved, sigma, ac })
    };
    Ok([lobe(first, node.t0)?, lobe(second, node.t1)?])
}

/// Points where loop `a` crosses loop `b` or one of its period translates.
fn crossings(surface: &SurfaceModel, a: &DiscreteCurve, b: &DiscreteCurve) -> Vec<Point> {
    close_pairs(surface, a, b, 0.0).into_iter().map(|(_, p)| p).collect()
}

/// Chord distance from `p` to the nearest of the points `center + lambda`.
fn distance_mod(surface: &SurfaceModel, center: &Point, lambdas: &[Vec2], p: &Point) -> f64 {
    lambdas.iter().map(|l| surface.chord_length(&(center + l), p)).fold(f64::INFINITY, f64::min)
}

/// Surgery of sign `sign` at scale `r` on the region perturbed by `s * phi` along its
/// outward normal.
///
/// Each lobe is perturbed separately and the ball is centered midway between the two
/// displaced corners; it must contain every crossing of the perturbed lobes near the node,
/// so that the surgery deletes their overlap. `r = 0` with `s = 0` returns the region.
#[allow(clippy::too_many_arguments)]
pub fn cut_and_paste(
    surface: &SurfaceModel,
    region: &Region,
    node: &NodeData,
    phi: &TestFunction,
    s: f64,
    r: f64,
    sign: SurgerySign,
    c: f64,
) -> Result<SurgeryResult> {
    if region.boundary.len() != 1 {
        return Err(Error::Invalid("surgery needs a region bounded by a single curve".into()));
    }
    if node.config != Configuration::Config1 {
        return Err(Error::Invalid("surgery is implemented for Config-1 nodes".into()));
    }
    if r < 0.0 || s < 0.0 {
        return Err(Error::Invalid(format!("surgery needs s >= 0 and r >= 0, got s = {s}, r = {r}")));
    }
    let curve = &region.boundary[0];
    let [a, b] = perturbed_lobes(surface, region, node, phi, s, c)?;
    let perturbed_ac = a.ac + b.ac;
    let nu = node.shift;
    let shift = curve.shift();
    let center = a.curve.vertices[0] + (b.curve.vertices[0] - nu - a.curve.vertices[0]) * 0.5;
    let mut lambdas = vec![Vec2::zeros()];
    lambdas.extend(surface.translates(2));
    let r_c = surgery_radius(surface, curve, node, c);
    let overlap = crossings(surface, &a.curve, &b.curve)
        .iter()
        .chain([a.curve.vertices[0], b.curve.vertices[0]].iter())
        .map(|p| distance_mod(surface, &center, &lambdas, p))
        .filter(|d| *d < r_c)
        .fold(0.0, f64::max);
    if r == 0.0 && s == 0.0 {
        return Ok(SurgeryResult {
            sign,
            s,
            r,
            region: region.clone(),
            perturbed_ac,
            ac: perturbed_ac,
            decrease: 0.0,
            decreases: false,
            ball_points: [center; 4],
            overlap,
        });
    }
    if r > r_c {
        return Err(Error::ScaleTooLarge { r, r_c });
    }
    if r <= overlap {
        return Err(Error::OrderingAmbiguous(format!("ball of radius {r} does not contain the lobe overlap of radius {overlap}")));
    }
    // Exit parameters of each lobe: leaving the ball at its corner, re-entering at its end.
    let exits = |lobe: &Lobe, at: Point| -> Result<(f64, f64)> {
        let m = lobe.curve.len() as f64;
        let too_large = |_| Error::ScaleTooLarge { r, r_c };
        let out = exit_parameter_about(surface, &lobe.curve, 0.0, &at, r, 1.0).map_err(too_large)?;
        let back = exit_parameter_about(surface, &lobe.curve, m, &(at + lobe.curve.shift()), r, -1.0).map_err(too_large)?;
        if out >= back {
            return Err(Error::OrderingAmbiguous(format!("lobe exit parameters {out} and {back} interleave")));
        }
        for p in inner(&lobe.curve, out, back) {
            if distance_mod(surface, &center, &lambdas, &p) < r {
                return Err(Error::OrderingAmbiguous("boundary re-enters the surgery ball".into()));
            }
        }
        Ok((out, back))
    };
    let (ta_out, ta_back) = exits(&a, center)?;
    let (tb_out, tb_back) = exits(&b, center + nu)?;
    let a_out = a.curve.point_at(ta_out);
    let a_back = a.curve.point_at(ta_back);
    let b_out = b.curve.point_at(tb_out);
    let b_back = b.curve.point_at(tb_back);
    let mut labelled = [a_out, a_back - nu, b_out - nu, b_back - shift];
    let base = angle_about(&center, &labelled[0]);
    let angles: Vec<f64> = labelled.iter().map(|p| (angle_about(&center, p) - base).rem_euclid(std::f64::consts::TAU)).collect();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|i, j| angles[*i].total_cmp(&angles[*j]));
    let gap = order.windows(2).map(|w| angles[w[1]] - angles[w[0]]).fold(f64::INFINITY, f64::min);
    if gap < 1e-9 {
        return Err(Error::OrderingAmbiguous("ball points are not transversally separated".into()));
    }
    labelled = [labelled[order[0]], labelled[order[1]], labelled[order[2]], labelled[order[3]]];
    let spacing = curve.length(surface) / curve.segment_count() as f64;
    let pieces = |p: &Point, q: &Point| ((surface.chord_length(p, q) / spacing).round() as usize).max(2);
    let out = match sign {
        SurgerySign::Minus => {
            let close = |lobe: &Lobe, from: f64, to: f64| -> Result<DiscreteCurve> {
                let start = lobe.curve.point_at(from);
                let end = lobe.curve.point_at(to);
                let mut v = vec![start];
                v.extend(inner(&lobe.curve, from, to));
                v.push(end);
                let target = start + lobe.curve.shift();
                let arc = constant_curvature_arc(surface, &end, &target, lobe.sigma * c, pieces(&end, &target))?;
                v.extend(&arc[1..arc.len() - 1]);
                DiscreteCurve::closed(v, lobe.curve.shift())
            };
            let first = close(&a, ta_out, ta_back)?;
            let second = close(&b, tb_out, tb_back)?;
            if loops_touch(surface, &first, &second, 1e-9 * spacing) {
                return Err(Error::OverlapUnresolved);
            }
            Region::new(surface, vec![first, second], region.witnesses.clone())?
        }
        SurgerySign::Plus => {
            let chord = |p: &Point, q: &Point| -> Result<Vec<Point>> {
                solve_geodesic(surface, p, q, 1e-13)?.sample(surface, pieces(p, q))
            };
            // Second lobe's end, first lobe backwards, second lobe forwards.
            let mut v = chord(&(b_back - shift), &(a_back - nu))?;
            v.pop();
            v.push(a_back - nu);
            v.extend(inner(&a.curve, ta_out, ta_back).into_iter().rev().map(|p| p - nu));
            v.push(a_out - nu);
            let bridge = chord(&(a_out - nu), &(b_out - nu * 2.0))?;
            v.extend(&bridge[1..bridge.len() - 1]);
            v.push(b_out - nu * 2.0);
            v.extend(inner(&b.curve, tb_out, tb_back).into_iter().map(|p| p - nu * 2.0));
            let merged = DiscreteCurve::closed(v, shift - nu * 2.0)?;
            Region::new(surface, vec![merged], region.witnesses.clone())?
        }
    };
    let ac = ac_functional(surface, &out, c);
    let decrease = perturbed_ac - ac;
    Ok(SurgeryResult {
        sign,
        s,
        r,
        region: out,
        perturbed_ac,
        ac,
        decrease,
        decreases: decrease > 0.0,
        ball_points: labelled,
        overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minmax::fixtures::figure_eight;
    use std::f64::consts::PI;

    #[test]
    fn both_surgeries_lower_the_functional() {
        let fx = figure_eight(1.0, PI / 2.0, 0.01);
        let phi = TestFunction::constant(fx.region.boundary[0].len(), 1.0);
        let r_c = surgery_radius(&fx.surface, &fx.region.boundary[0], &fx.node, 1.0);
        assert!(r_c > 0.0);
        for sign in [SurgerySign::Plus, SurgerySign::Minus] {
            let out = cut_and_paste(&fx.surface, &fx.region, &fx.node, &phi, 0.0, 0.5 * r_c, sign, 1.0).unwrap();
            assert!(out.decreases, "{sign:?}: {}", out.decrease);
            assert!(out.ac < out.perturbed_ac);
        }
    }

    #[test]
    fn zero_radius_is_the_identity() {
        let fx = figure_eight(1.0, PI / 2.0, 0.02);
        let phi = TestFunction::constant(fx.region.boundary[0].len(), 1.0);
        let out = cut_and_paste(&fx.surface, &fx.region, &fx.node, &phi, 0.0, 0.0, SurgerySign::Plus, 1.0).unwrap();
        assert!((out.ac - ac_functional(&fx.surface, &fx.region, 1.0)).abs() < 1e-8);
    }

    #[test]
    fn plus_chords_are_shorter_than_the_wedge_arcs() {
        let fx = figure_eight(1.0, PI / 2.0, 0.01);
        let phi = TestFunction::constant(fx.region.boundary[0].len(), 1.0);
        let r = 0.1;
        let before = fx.region.boundary_length(&fx.surface);
        let out = cut_and_paste(&fx.surface, &fx.region, &fx.node, &phi, 0.0, r, SurgerySign::Plus, 1.0).unwrap();
        // Each straight wedge pair of legs of length r is replaced by a chord across an angle pi - alpha.
        let chord = 2.0 * r * ((PI - PI / 2.0) / 2.0).sin();
        let drop = before - out.region.boundary_length(&fx.surface);
        assert!((drop - 2.0 * (2.0 * r - chord)).abs() < 1e-6, "{drop}");
        assert!(chord < 2.0 * r);
    }

    #[test]
    fn oversized_radius_rejected() {
        let fx = figure_eight(1.0, PI / 2.0, 0.02);
        let phi = TestFunction::constant(fx.region.boundary[0].len(), 1.0);
        let err = cut_and_paste(&fx.surface, &fx.region, &fx.node, &phi, 0.0, 10.0, SurgerySign::Minus, 1.0).unwrap_err();
        assert!(matches!(err, Error::ScaleTooLarge { .. }));
    }

    #[test]
    fn results_vary_continuously_in_s_and_r() {
        let fx = figure_eight(1.0, PI / 2.0, 0.01);
        let phi = TestFunction::constant(fx.region.boundary[0].len(), 1.0);
        let r_c = surgery_radius(&fx.surface, &fx.region.boundary[0], &fx.node, 1.0);
        let value = |s: f64, r: f64| {
            cut_and_paste(&fx.surface, &fx.region, &fx.node, &phi, s, r, SurgerySign::Minus, 1.0).unwrap().ac
        };
        let h = 0.02 * r_c;
        let base = value(0.05 * r_c, 0.5 * r_c);
        assert!((value(0.05 * r_c + h, 0.5 * r_c) - base).abs() < 20.0 * h);
        assert!((value(0.05 * r_c, 0.5 * r_c + h) - base).abs() < 20.0 * h);
    }
}
