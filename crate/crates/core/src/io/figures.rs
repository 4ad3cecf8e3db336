//! Tables and plots of the two threshold figures, and their regression against the
//! reference plot coordinates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::svg::{line_plot, Axes, Series};
use super::write_csv;
use crate::criteria::{Figure2Point, RegionBoundaryTrace};
use crate::error::Result;

/// Reference coordinates of the upper branch `c = sqrt(m) cot(pi sqrt(m))`, as `(minK, c)`.
pub const FIGURE1_UPPER: [(f64, f64); 4] = [(0.025, 0.291689), (0.05, 0.264142), (0.075, 0.235599), (0.1, 0.205981)];

/// Reference coordinates of the lower branch, as `(minK, c)`.
pub const FIGURE1_LOWER: [(f64, f64); 14] = [
    (0.1165, 0.175),
    (0.1158, 0.1625),
    (0.1147, 0.15),
    (0.1132, 0.1375),
    (0.1112, 0.125),
    (0.1088, 0.1125),
    (0.1059, 0.1),
    (0.1026, 0.0875),
    (0.0987, 0.075),
    (0.0943, 0.0625),
    (0.0893, 0.05),
    (0.0838, 0.0375),
    (0.0775, 0.025),
    (0.0705, 0.0125),
];

/// Reference corner where both branches meet.
pub const FIGURE1_CORNER: (f64, f64) = (0.1167, 0.1856);

/// Reference coordinates of the curve `c = coth(inj)`, as `(inj, c)`.
pub const FIGURE2_BLUE: [(f64, f64); 23] = [
    (0.10034, 10.0),
    (0.11157, 9.0),
    (0.12566, 8.0),
    (0.14384, 7.0),
    (0.16824, 6.0),
    (0.20273, 5.0),
    (0.25541, 4.0),
    (0.29389, 3.5),
    (0.34657, 3.0),
    (0.42365, 2.5),
    (0.54931, 2.0),
    (0.625, 1.8031),
    (0.75, 1.5744),
    (0.875, 1.4206),
    (1.0, 1.3130),
    (1.25, 1.1789),
    (1.5, 1.1048),
    (2.0, 1.0373),
    (3.0, 1.0050),
    (4.0, 1.0007),
    (5.0, 1.0001),
    (6.0, 1.0),
    (10.0, 1.0),
];

/// Reference coordinates of the curve `c = (pi/2) inj^-1 (1 + inj^2 / (2 pi))`.
pub const FIGURE2_RED: [(f64, f64); 26] = [
    (0.15770, 10.0),
    (0.17539, 9.0),
    (0.19757, 8.0),
    (0.22623, 7.0),
    (0.26472, 6.0),
    (0.31926, 5.0),
    (0.40284, 4.0),
    (0.46419, 3.5),
    (0.54869, 3.0),
    (0.67371, 2.5),
    (0.88282, 2.0),
    (1.0, 1.8208),
    (1.25, 1.56914),
    (1.5, 1.4222),
    (1.75, 1.3351),
    (2.0, 1.2854),
    (2.5, 1.25332),
    (3.0, 1.2736),
    (3.5, 1.3238),
    (4.0, 1.3927),
    (5.0, 1.56416),
    (6.0, 1.7618),
    (7.0, 1.9744),
    (8.0, 2.19635),
    (9.0, 2.42453),
    (10.0, 2.65708),
];

/// Default tolerances of the regression, by table.
pub const FIGURE1_UPPER_TOL: f64 = 2e-3;
pub const FIGURE1_LOWER_TOL: f64 = 3e-3;
pub const FIGURE1_CORNER_TOL: f64 = 2e-3;
pub const FIGURE1_INTERCEPT_TOL: f64 = 1e-4;
pub const FIGURE2_TOL: f64 = 5e-3;

/// Columns `minK, c_upper, c_lower`; `c_lower` is empty left of the lower branch.
pub fn figure1_csv(trace: &RegionBoundaryTrace) -> Result<String> {
    write_csv(&["minK", "c_upper", "c_lower"], trace.points.iter().map(|p| (p.min_k, p.c_upper, p.c_lower)))
}

/// Columns `inj, c_blue, c_red`.
pub fn figure2_csv(points: &[Figure2Point]) -> Result<String> {
    write_csv(&["inj", "c_blue", "c_red"], points.iter().map(|p| (p.inj, p.c_blue, p.c_red)))
}

/// Upper-branch polyline, starting at its limit `(0, 1/pi)`.
pub fn figure1_upper(trace: &RegionBoundaryTrace) -> Vec<(f64, f64)> {
    let mut v = vec![(0.0, 1.0 / PI)];
    v.extend(trace.points.iter().map(|p| (p.min_k, p.c_upper)));
    v
}

/// Lower-branch polyline from the intercept to the corner.
pub fn figure1_lower(trace: &RegionBoundaryTrace) -> Vec<(f64, f64)> {
    trace.points.iter().filter_map(|p| p.c_lower.map(|c| (p.min_k, c))).collect()
}

pub fn figure1_svg(trace: &RegionBoundaryTrace) -> String {
    let axes = Axes {
        x_range: (0.0, 0.5),
        y_range: (0.0, 0.65),
        x_label: "min K (max K = 1)".into(),
        y_label: "c".into(),
        x_ticks: vec![0.125, 0.25, 0.5],
        y_ticks: vec![1.0 / PI, 0.5],
    };
    let series = [
        Series::new("upper branch", "blue", figure1_upper(trace)),
        Series::new("lower branch", "blue", figure1_lower(trace)),
        Series::new("1/8", "gray", vec![(0.125, 0.0), (0.125, 1.0 / PI)]).dashed(),
        Series::new("1/pi", "gray", vec![(0.0, 1.0 / PI), (0.125, 1.0 / PI)]).dashed(),
    ];
    line_plot(&axes, &series)
}

pub fn figure2_svg(points: &[Figure2Point]) -> String {
    let axes = Axes {
        x_range: (0.0, 10.0),
        y_range: (0.0, 10.6),
        x_label: "inj (min K = -1)".into(),
        y_label: "c".into(),
        x_ticks: vec![5.0, 10.0],
        y_ticks: vec![1.0, 5.0],
    };
    let series = [
        Series::new("c = coth(inj)", "blue", points.iter().map(|p| (p.inj, p.c_blue)).collect()),
        Series::new("area bound", "red", points.iter().map(|p| (p.inj, p.c_red)).collect()),
        Series::new("c = 1", "gray", vec![(0.0, 1.0), (10.0, 1.0)]).dashed(),
    ];
    line_plot(&axes, &series)
}

/// Euclidean distance from `(x, y)` to a polyline.
pub fn distance_to_polyline(line: &[(f64, f64)], x: f64, y: f64) -> f64 {
    if line.len() == 1 {
        return (line[0].0 - x).hypot(line[0].1 - y);
    }
    line.windows(2)
        .map(|w| {
            let (ax, ay) = w[0];
            let (dx, dy) = (w[1].0 - ax, w[1].1 - ay);
            let len2 = dx * dx + dy * dy;
            let t = if len2 > 0.0 { (((x - ax) * dx + (y - ay) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
            (ax + t * dx - x).hypot(ay + t * dy - y)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Comparison of one reference point with the emitted curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionPoint {
    pub figure: u8,
    pub curve: String,
    pub x: f64,
    pub y: f64,
    pub distance: f64,
    pub tol: f64,
    pub pass: bool,
}

fn check(figure: u8, curve: &str, (x, y): (f64, f64), distance: f64, tol: f64) -> RegressionPoint {
    RegressionPoint { figure, curve: curve.into(), x, y, distance, tol, pass: distance <= tol }
}

/// Distances of the reference Figure 1 points to the emitted branches; `tol` replaces the
/// per-table defaults.
pub fn figure1_regression(trace: &RegionBoundaryTrace, tol: Option<f64>) -> Vec<RegressionPoint> {
    let upper = figure1_upper(trace);
    let lower = figure1_lower(trace);
    let mut out: Vec<RegressionPoint> = FIGURE1_UPPER
        .iter()
        .map(|&p| check(1, "upper", p, distance_to_polyline(&upper, p.0, p.1), tol.unwrap_or(FIGURE1_UPPER_TOL)))
        .collect();
    out.extend(
        FIGURE1_LOWER
            .iter()
            .map(|&p| check(1, "lower", p, distance_to_polyline(&lower, p.0, p.1), tol.unwrap_or(FIGURE1_LOWER_TOL))),
    );
    let (m, c) = trace.corner;
    out.push(check(
        1,
        "corner",
        FIGURE1_CORNER,
        (m - FIGURE1_CORNER.0).abs().max((c - FIGURE1_CORNER.1).abs()),
        tol.unwrap_or(FIGURE1_CORNER_TOL),
    ));
    out.push(check(1, "intercept", (1.0 / 16.0, 0.0), (trace.intercept - 1.0 / 16.0).abs(), tol.unwrap_or(FIGURE1_INTERCEPT_TOL)));
    out
}

/// Distances of the reference Figure 2 points to the emitted curves.
pub fn figure2_regression(points: &[Figure2Point], tol: Option<f64>) -> Vec<RegressionPoint> {
    let blue: Vec<(f64, f64)> = points.iter().map(|p| (p.inj, p.c_blue)).collect();
    let red: Vec<(f64, f64)> = points.iter().map(|p| (p.inj, p.c_red)).collect();
    let tol = tol.unwrap_or(FIGURE2_TOL);
    let mut out: Vec<RegressionPoint> =
        FIGURE2_BLUE.iter().map(|&p| check(2, "blue", p, distance_to_polyline(&blue, p.0, p.1), tol)).collect();
    out.extend(FIGURE2_RED.iter().map(|&p| check(2, "red", p, distance_to_polyline(&red, p.0, p.1), tol)));
    out
}
