//! Regions bounded by discrete curves, selected by witness points.

use serde::{Deserialize, Serialize};

use super::{detect_node, segment_distance, split_at_node, DiscreteCurve};
use crate::error::{Error, Result};
use crate::geometry::{Point, SurfaceModel, Vec2};

const WITNESS_CLEARANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
enum LoopKind {
    /// Contractible loop bounding a disk in the cover.
    Disk,
    /// Loop winding once around the axis of a surface of revolution; bounds the pole side.
    PoleSide,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Loop {
    vertices: Vec<Point>,
    shift: Vec2,
    kind: LoopKind,
    area: f64,
    curve: usize,
    /// Parent vertex index of every loop vertex, `None` for an inserted node point.
    parent: Vec<Option<usize>>,
}

/// A union of components of the complement of its boundary curves.
///
/// Every boundary curve is a simple loop or a loop with one node, which is split into its
/// two sub-loops. Each simple loop bounds a disk; the disks must be nested or disjoint.
/// A component is identified by the set of disks containing it, and the region consists
/// of the components containing the witness points. With no boundary, one witness selects
/// the whole surface and no witness selects the empty region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub boundary: Vec<DiscreteCurve>,
    pub witnesses: Vec<Point>,
    loops: Vec<Loop>,
    patterns: Vec<Vec<usize>>,
    area: f64,
    sides: Vec<Vec<f64>>,
    lambdas: Vec<Vec2>,
}

impl Region {
    pub fn new(surface: &SurfaceModel, boundary: Vec<DiscreteCurve>, witnesses: Vec<Point>) -> Result<Region> {
        let mut lambdas = vec![Vec2::zeros()];
        lambdas.extend(surface.translates(3));
        let mut loops = Vec::new();
        for (ci, curve) in boundary.iter().enumerate() {
            if !curve.is_closed() {
                return Err(Error::Invalid("region boundaries must be closed".into()));
            }
            let parts: Vec<(DiscreteCurve, Vec<Option<usize>>)> = match detect_node(surface, curve)? {
                None => vec![(curve.clone(), (0..curve.len()).map(Some).collect())],
                Some(node) => {
                    let (a, b) = split_at_node(curve, &node)?;
                    let n = curve.len();
                    let map = |c: &DiscreteCurve, from: f64| -> Vec<Option<usize>> {
                        let first = (from + 1e-9).floor() as usize + 1;
                        std::iter::once(None).chain((0..c.len() - 1).map(|k| Some((first + k) % n))).collect()
                    };
                    let ma = map(&a, node.t0);
                    let mb = map(&b, node.t1);
                    vec![(a, ma), (b, mb)]
                }
            };
            for (part, parent) in parts {
                let shift = part.shift();
                let kind = if shift.norm() == 0.0 {
                    LoopKind::Disk
                } else if matches!(surface, SurfaceModel::Revolution(_))
                    && shift.x == 0.0
                    && (shift.y.abs() - 2.0 * std::f64::consts::PI).abs() < 1e-9
                {
                    LoopKind::PoleSide
                } else {
                    return Err(Error::Invalid("a loop winding around a torus bounds no disk".into()));
                };
                let (signed, _) = surface.loop_integrals(&part.vertices, &shift)?;
                loops.push(Loop { vertices: part.vertices, shift, kind, area: signed.abs(), curve: ci, parent });
            }
        }
        let mut region = Region {
            boundary,
            witnesses: witnesses.clone(),
            loops,
            patterns: Vec::new(),
            area: 0.0,
            sides: Vec::new(),
            lambdas,
        };
        for w in &witnesses {
            surface.check_chart(w)?;
            if region.distance_to_boundary(w) < WITNESS_CLEARANCE {
                return Err(Error::AmbiguousSide);
            }
            let p = region.pattern(w);
            if !region.patterns.contains(&p) {
                region.patterns.push(p);
            }
        }
        region.area = region.patterns.iter().map(|p| region.component_area(surface, p)).sum::<f64>().max(0.0);
        region.sides = region.compute_sides(surface)?;
        Ok(region)
    }

    pub fn empty() -> Region {
        Region {
            boundary: Vec::new(),
            witnesses: Vec::new(),
            loops: Vec::new(),
            patterns: Vec::new(),
            area: 0.0,
            sides: Vec::new(),
            lambdas: Vec::new(),
        }
    }

    pub fn full(surface: &SurfaceModel, witness: Point) -> Result<Region> {
        Region::new(surface, Vec::new(), vec![witness])
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn boundary_length(&self, surface: &SurfaceModel) -> f64 {
        self.boundary.iter().map(|c| c.length(surface)).sum()
    }

    /// Whether `p` lies in the region (points on the boundary count as outside).
    pub fn contains(&self, p: &Point) -> bool {
        !self.patterns.is_empty() && self.patterns.contains(&self.pattern(p))
    }

    /// Per boundary curve and vertex: `+1` where the region lies to the left, `-1` to the right,
    /// `0` along loops that do not bound the region.
    /// Node vertices take the sign of one of the two sub-loops.
    pub fn side_signs(&self) -> &[Vec<f64>] {
        &self.sides
    }

    /// Geodesic curvature of every boundary curve with respect to the region side.
    pub fn geodesic_curvature(&self, surface: &SurfaceModel) -> Result<Vec<Vec<f64>>> {
        self.boundary
            .iter()
            .zip(&self.sides)
            .map(|(c, s)| Ok(c.geodesic_curvature(surface)?.iter().zip(s).map(|(k, s)| k * s).collect()))
            .collect()
    }

    /// The same boundary with the complementary side selected.
    pub fn complement(&self, surface: &SurfaceModel, witnesses: Vec<Point>) -> Result<Region> {
        for w in &witnesses {
            if self.contains(w) {
                return Err(Error::Invalid("complement witness lies in the region".into()));
            }
        }
        Region::new(surface, self.boundary.clone(), witnesses)
    }

    /// Chart distance from `p` (and its period translates) to the boundary polygons.
    pub fn distance_to_boundary(&self, p: &Point) -> f64 {
        let mut best = f64::INFINITY;
        for lp in &self.loops {
            let n = lp.vertices.len();
            for i in 0..n {
                let a = lp.vertices[i];
                let b = if i + 1 < n { lp.vertices[i + 1] } else { lp.vertices[0] + lp.shift };
                for l in &self.lambdas {
                    let q = p + l;
                    let (d, _, _) = segment_distance(&a, &b, &q, &q);
                    best = best.min(d);
                }
            }
        }
        best
    }

    fn in_loop(&self, lp: &Loop, p: &Point) -> bool {
        match lp.kind {
            LoopKind::Disk => self.lambdas.iter().any(|l| winding_number(&lp.vertices, &(p + l)) != 0),
            LoopKind::PoleSide => {
                let n = lp.vertices.len();
                let period = lp.shift.y.abs();
                let mut crossings = 0;
                for k in -2..=2 {
                    let off = Vec2::new(0.0, period * k as f64);
                    for i in 0..n {
                        let a = lp.vertices[i] + off;
                        let b = if i + 1 < n { lp.vertices[i + 1] + off } else { lp.vertices[0] + lp.shift + off };
                        if (a.y > p.y) != (b.y > p.y) {
                            let s = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                            if s < p.x {
                                crossings += 1;
                            }
                        }
                    }
                }
                crossings % 2 == 0
            }
        }
    }

    fn pattern(&self, p: &Point) -> Vec<usize> {
        (0..self.loops.len()).filter(|&i| self.in_loop(&self.loops[i], p)).collect()
    }

    fn probe(lp: &Loop) -> Point {
        lp.vertices[lp.vertices.len() / 2]
    }

    fn inside_of(&self, i: usize, j: usize) -> bool {
        i != j && self.loops[i].area <= self.loops[j].area && self.in_loop(&self.loops[j], &Self::probe(&self.loops[i]))
    }

    fn component_area(&self, surface: &SurfaceModel, pattern: &[usize]) -> f64 {
        let outer = pattern.iter().copied().min_by(|&a, &b| self.loops[a].area.total_cmp(&self.loops[b].area));
        let candidates: Vec<usize> = (0..self.loops.len())
            .filter(|i| !pattern.contains(i))
            .filter(|&i| outer.is_none_or(|m| self.inside_of(i, m)))
            .collect();
        let children = candidates.iter().filter(|&&i| !candidates.iter().any(|&k| self.inside_of(i, k)));
        let base = outer.map_or_else(|| surface.total_area(), |m| self.loops[m].area);
        base - children.map(|&i| self.loops[i].area).sum::<f64>()
    }

    fn compute_sides(&self, surface: &SurfaceModel) -> Result<Vec<Vec<f64>>> {
        let mut sides: Vec<Vec<f64>> = self.boundary.iter().map(|c| vec![0.0; c.len()]).collect();
        let mut assigned: Vec<Vec<bool>> = self.boundary.iter().map(|c| vec![false; c.len()]).collect();
        if self.patterns.is_empty() {
            return Ok(sides);
        }
        for lp in &self.loops {
            let n = lp.vertices.len();
            let k = n / 2;
            let x = lp.vertices[k];
            let chart_t = lp.vertices[k + 1] - lp.vertices[k - 1];
            let offset = surface.rotate_left(&x, &chart_t);
            let offset = offset * (1e-6 * chart_t.norm() / offset.norm());
            // A loop with the region on both sides or on neither side does not bound it.
            let sign = match (self.contains(&(x + offset)), self.contains(&(x - offset))) {
                (true, false) => 1.0,
                (false, true) => -1.0,
                _ => 0.0,
            };
            for idx in lp.parent.iter().flatten() {
                sides[lp.curve][*idx] = sign;
                assigned[lp.curve][*idx] = true;
            }
        }
        for (s, done) in sides.iter_mut().zip(&assigned) {
            // Node vertices are not listed in any sub-loop; copy a neighbour's sign.
            let n = s.len();
            for i in 0..n {
                if !done[i] {
                    s[i] = if s[(i + 1) % n] != 0.0 { s[(i + 1) % n] } else { s[(i + n - 1) % n] };
                }
            }
        }
        Ok(sides)
    }
}

/// Winding number of a closed chart polygon around `p`.
fn winding_number(vertices: &[Point], p: &Point) -> i32 {
    let n = vertices.len();
    let mut w = 0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let cross = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
        if a.y <= p.y {
            if b.y > p.y && cross > 0.0 {
                w += 1;
            }
        } else if b.y <= p.y && cross < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Metric area of the region.
pub fn area(region: &Region) -> f64 {
    region.area()
}

/// `length(boundary) - c * area(region)`.
pub fn ac_functional(surface: &SurfaceModel, region: &Region, c: f64) -> f64 {
    region.boundary_length(surface) - c * region.area()
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_disk() {
        let s = SurfaceModel::flat_square(10.0);
        let r = Region::new(&s, vec![circle(Point::new(0.0, 0.0), 1.0, 4096)], vec![Point::new(0.1, 0.0)]).unwrap();
        assert!((r.area() - PI).abs() < 1e-4);
        assert!((ac_functional(&s, &r, 1.0) - PI).abs() < 1e-3);
    }

    #[test]
    fn torus_minus_small_disk() {
        let s = SurfaceModel::flat_square(1.0);
        let eps = 0.05;
        let r = Region::new(&s, vec![circle(Point::new(0.5, 0.5), eps, 2048)], vec![Point::new(0.1, 0.1)]).unwrap();
        assert!((r.area() - (1.0 - PI * eps * eps)).abs() < 1e-4);
        assert!(r.contains(&Point::new(0.9, 0.9)));
        assert!(r.contains(&Point::new(1.9, 0.1)));
        assert!(!r.contains(&Point::new(0.5, 0.51)));
    }

    #[test]
    fn empty_and_full() {
        let s = SurfaceModel::flat_square(2.0);
        let e = Region::empty();
        assert_eq!(ac_functional(&s, &e, 1.0), 0.0);
        let f = Region::full(&s, Point::new(0.3, 0.3)).unwrap();
        assert!((f.area() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_cap() {
        let s = SurfaceModel::sphere(1.0);
        for rho in [0.3, PI / 4.0, 2.0] {
            let r = Region::new(&s, vec![latitude(rho, 512)], vec![Point::new(rho / 2.0, 1.0)]).unwrap();
            assert!((r.area() - 2.0 * PI * (1.0 - rho.cos())).abs() < 1e-4, "rho {rho}");
            let c = 0.7;
            let expected = 2.0 * PI * rho.sin() - 2.0 * PI * c * (1.0 - rho.cos());
            assert!((ac_functional(&s, &r, c) - expected).abs() < 1e-3);
            let other = Region::new(&s, vec![latitude(rho, 512)], vec![Point::new((rho + PI) / 2.0, 1.0)]).unwrap();
            assert!((other.area() + r.area() - 4.0 * PI).abs() < 1e-9);
        }
    }

    #[test]
    fn witness_on_boundary_is_ambiguous() {
        let s = SurfaceModel::flat_square(10.0);
        let c = circle(Point::new(0.0, 0.0), 1.0, 64);
        let w = c.vertices[3];
        assert!(matches!(Region::new(&s, vec![c], vec![w]), Err(Error::AmbiguousSide)));
    }

    #[test]
    fn curvature_sign_follows_side() {
        let s = SurfaceModel::flat_square(10.0);
        let c = circle(Point::new(0.0, 0.0), 2.0, 256);
        let inside = Region::new(&s, vec![c.clone()], vec![Point::new(0.0, 0.0)]).unwrap();
        let outside = Region::new(&s, vec![c.clone()], vec![Point::new(4.0, 4.0)]).unwrap();
        let ki = inside.geodesic_curvature(&s).unwrap();
        let ko = outside.geodesic_curvature(&s).unwrap();
        for (a, b) in ki[0].iter().zip(&ko[0]) {
            assert!((a - 0.5).abs() < 1e-4);
            assert_eq!(*a, -b);
        }
        let reversed = Region::new(&s, vec![c.reversed()], vec![Point::new(0.0, 0.0)]).unwrap();
        assert!((reversed.geodesic_curvature(&s).unwrap()[0][5] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn lemniscate_region_has_two_lobes() {
        let s = SurfaceModel::flat_square(40.0);
        let fx = lemniscate(1.0, PI / 2.0, 0.01);
        let r = Region::new(&s, vec![fx.curve.clone()], fx.witnesses.to_vec()).unwrap();
        let one = Region::new(&s, vec![fx.curve.clone()], vec![fx.witnesses[0]]).unwrap();
        assert!((r.area() - 2.0 * one.area()).abs() < 1e-9);
        // Kite of the legs plus the circular segment beyond it.
        let half = PI / 4.0;
        let leg = 1.0 / half.tan();
        let kite = leg * 1.0;
        let sector = 0.5 * (PI + PI / 2.0);
        let expected = kite + sector;
        assert!((one.area() - expected).abs() < 1e-3, "{} vs {}", one.area(), expected);
        for (k, side) in r.geodesic_curvature(&s).unwrap()[0].iter().zip(&r.side_signs()[0]) {
            assert!(*k > -1e-9, "curvature {k} side {side}");
        }
    }

    #[test]
    fn nested_annulus() {
        let s = SurfaceModel::flat_square(10.0);
        let outer = circle(Point::new(0.0, 0.0), 2.0, 2048);
        let inner = circle(Point::new(0.0, 0.0), 1.0, 2048);
        let r = Region::new(&s, vec![outer, inner], vec![Point::new(1.5, 0.0)]).unwrap();
        assert!((r.area() - 3.0 * PI).abs() < 1e-4);
    }
}
