//! Regions with known widths and nodes for the min-max constructions.

use std::f64::consts::PI;

use crate::curve::fixtures::{lemniscate, sphere_circle};
use crate::curve::{detect_node, DiscreteCurve, NodeData, Region};
use crate::geometry::{Point, SurfaceModel, Vec2};

/// A region with two boundary paths pinned at common points `p` and `q`.
#[derive(Clone, Debug)]
pub struct PathFixture {
    pub surface: SurfaceModel,
    pub region: Region,
    pub first: DiscreteCurve,
    pub second: DiscreteCurve,
    pub p: Point,
    pub q: Point,
}

/// Points from `a` to `b` (excluding `b`) about `spacing` apart.
fn segment(a: Point, b: Point, spacing: f64) -> Vec<Point> {
    let n = (((b - a).norm() / spacing).round() as usize).max(1);
    (0..n).map(|k| a + (b - a) * (k as f64 / n as f64)).collect()
}

/// Arc of the circle about `center` from angle `from` to `to` (excluding the end).
fn arc(center: Point, radius: f64, from: f64, to: f64, spacing: f64) -> Vec<Point> {
    let n = ((radius * (to - from).abs() / spacing).round() as usize).max(2);
    (0..n)
        .map(|k| {
            let a = from + (to - from) * k as f64 / n as f64;
            center + Vec2::new(a.cos(), a.sin()) * radius
        })
        .collect()
}

fn pinned(mut v: Vec<Point>, end: Point) -> DiscreteCurve {
    v.push(end);
    DiscreteCurve::pinned(v).expect("valid path")
}

/// Rectangle `[0, width] x [0, height]` on a large flat torus. The first path is the bottom
/// edge and the second runs up, across the top and down; both join `(0, 0)` to `(width, 0)`.
pub fn rectangle(width: f64, height: f64, spacing: f64) -> PathFixture {
    let surface = SurfaceModel::flat_square(10.0 * width.max(height));
    let (p, q) = (Point::new(0.0, 0.0), Point::new(width, 0.0));
    let (tl, tr) = (Point::new(0.0, height), Point::new(width, height));
    let first = pinned(segment(p, q, spacing), q);
    let mut top = segment(p, tl, spacing);
    top.extend(segment(tl, tr, spacing));
    top.extend(segment(tr, q, spacing));
    let second = pinned(top, q);
    let mut boundary = segment(p, q, spacing);
    boundary.extend(segment(q, tr, spacing));
    boundary.extend(segment(tr, tl, spacing));
    boundary.extend(segment(tl, p, spacing));
    let curve = DiscreteCurve::closed(boundary, Vec2::zeros()).expect("valid rectangle");
    let region = Region::new(&surface, vec![curve], vec![Point::new(width / 2.0, height / 2.0)]).expect("valid region");
    PathFixture { surface, region, first, second, p, q }
}

/// Two disks of radius `radius` centered at `(+-offset, 0)` joined by a straight neck of
/// width `neck`. The paths run from `p = (0, neck / 2)` to `q = (0, -neck / 2)` around the
/// left and the right disk.
pub fn dumbbell(radius: f64, offset: f64, neck: f64, spacing: f64) -> PathFixture {
    let surface = SurfaceModel::flat_square(10.0 * (offset + radius));
    let h = neck / 2.0;
    let a0 = (h / radius).asin();
    let x1 = offset - radius * a0.cos();
    let (p, q) = (Point::new(0.0, h), Point::new(0.0, -h));
    let left = Point::new(-offset, 0.0);
    let right = Point::new(offset, 0.0);
    // Counterclockwise boundary starting at p, heading west along the top of the neck.
    let mut first_part = segment(p, Point::new(-x1, h), spacing);
    first_part.extend(arc(left, radius, a0, 2.0 * PI - a0, spacing));
    first_part.extend(segment(Point::new(-x1, -h), q, spacing));
    let mut second_part = segment(q, Point::new(x1, -h), spacing);
    second_part.extend(arc(right, radius, PI + a0, 3.0 * PI - a0, spacing));
    second_part.extend(segment(Point::new(x1, h), p, spacing));
    let first = pinned(first_part.clone(), q);
    let mut reversed: Vec<Point> = second_part.clone();
    reversed.push(p);
    reversed.reverse();
    let second = DiscreteCurve::pinned(reversed).expect("valid path");
    let mut boundary = first_part;
    boundary.extend(second_part);
    let curve = DiscreteCurve::closed(boundary, Vec2::zeros()).expect("valid dumbbell");
    let region = Region::new(&surface, vec![curve], vec![left, right]).expect("valid region");
    PathFixture { surface, region, first, second, p, q }
}

/// Config-1 region: both lobes of the planar figure-eight, with its node.
#[derive(Clone, Debug)]
pub struct FigureEight {
    pub surface: SurfaceModel,
    pub region: Region,
    pub node: NodeData,
    pub c: f64,
    pub alpha: f64,
}

pub fn figure_eight(c: f64, alpha: f64, spacing: f64) -> FigureEight {
    let fx = lemniscate(c, alpha, spacing);
    let surface = SurfaceModel::flat_square(40.0 / c);
    let node = detect_node(&surface, &fx.curve).expect("valid curve").expect("figure-eight has a node");
    let region = Region::new(&surface, vec![fx.curve], fx.witnesses.to_vec()).expect("valid region");
    FigureEight { surface, region, node, c, alpha }
}

/// Config-2 region on the unit sphere: the complement of two closed disks that touch at
/// `x0 = (pi / 2, 0)`.
#[derive(Clone, Debug)]
pub struct TouchingDisks {
    pub surface: SurfaceModel,
    pub region: Region,
    pub x0: Point,
    /// Length of each boundary circle, `2 pi sin(radius)`.
    pub circle_length: f64,
}

fn touching(first: DiscreteCurve, second: DiscreteCurve, radius: f64) -> TouchingDisks {
    let surface = SurfaceModel::sphere(1.0);
    let x0 = first.vertices[0];
    let mut v = first.vertices.clone();
    v.extend(second.vertices.iter().map(|p| p + first.shift()));
    let curve = DiscreteCurve::closed(v, first.shift() + second.shift()).expect("valid curve");
    let region = Region::new(&surface, vec![curve], vec![Point::new(PI / 2.0, PI)]).expect("valid region");
    TouchingDisks { surface, region, x0, circle_length: 2.0 * PI * radius.sin() }
}

/// Disks of radius `radius` centered on the equator on either side of `x0`. Both boundary
/// circles are contractible in the chart and the pinned family between them shrinks.
pub fn equatorial_pair(radius: f64, n: usize) -> TouchingDisks {
    let first = sphere_circle(Point::new(PI / 2.0, -radius), radius, n, PI / 2.0, false);
    let second = sphere_circle(Point::new(PI / 2.0, radius), radius, n, -PI / 2.0, false);
    touching(first, second, radius)
}

/// Disks of radius `radius` tangent to the equator at `x0` from the north and the south;
/// each contains a pole when `radius > pi / 4`. The middle of the family between the two
/// circles is the equator.
pub fn polar_pair(radius: f64, n: usize) -> TouchingDisks {
    let first = sphere_circle(Point::new(PI / 2.0 - radius, 0.0), radius, n, 0.0, false);
    let second = sphere_circle(Point::new(PI / 2.0 + radius, 0.0), radius, n, PI, false);
    touching(first, second, radius)
}
