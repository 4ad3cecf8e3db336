//! Static SVG: line plots with axes, chart views of curves, and sweepout filmstrips.

use std::fmt::Write;

use super::{polyline, SweepoutBundle};
use crate::curve::DiscreteCurve;
use crate::geometry::Point;

/// A polyline in data coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: &str, color: &str, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), color: color.into(), points, dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

/// Axis ranges, labels and tick positions of a line plot.
#[derive(Clone, Debug, PartialEq)]
pub struct Axes {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub x_label: String,
    pub y_label: String,
    pub x_ticks: Vec<f64>,
    pub y_ticks: Vec<f64>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn path_data(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut d = String::new();
    for (k, (x, y)) in points.into_iter().enumerate() {
        let _ = write!(d, "{}{:.3},{:.3}", if k == 0 { "M" } else { " L" }, x, y);
    }
    d
}

fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Line plot of `series`, clipped to the axis ranges.
pub fn line_plot(axes: &Axes, series: &[Series]) -> String {
    let (x0, x1) = axes.x_range;
    let (y0, y1) = axes.y_range;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut s = header(WIDTH, HEIGHT);
    let _ = writeln!(
        s,
        "<defs><clipPath id=\"plot\"><rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{:.0}\" height=\"{:.0}\"/></clipPath></defs>",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let axis = path_data([(px(x0), py(y1)), (px(x0), py(y0)), (px(x1), py(y0))]);
    let _ = writeln!(s, "<path d=\"{axis}\" fill=\"none\" stroke=\"black\"/>");
    for &t in &axes.x_ticks {
        let _ = writeln!(
            s,
            "<path d=\"{}\" stroke=\"black\"/><text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            path_data([(px(t), py(y0)), (px(t), py(y0) + 5.0)]),
            px(t),
            py(y0) + 18.0,
            t
        );
    }
    for &t in &axes.y_ticks {
        let _ = writeln!(
            s,
            "<path d=\"{}\" stroke=\"black\"/><text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" text-anchor=\"end\">{}</text>",
            path_data([(px(x0) - 5.0, py(t)), (px(x0), py(t))]),
            px(x0) - 8.0,
            py(t) + 4.0,
            t
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(&axes.x_label)
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{:.3}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.3})\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&axes.y_label)
    );
    for (k, ser) in series.iter().enumerate() {
        let finite: Vec<(f64, f64)> =
            ser.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).map(|&(x, y)| (px(x), py(y))).collect();
        if finite.is_empty() {
            continue;
        }
        let dash = if ser.dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        let _ = writeln!(
            s,
            "<path clip-path=\"url(#plot)\" d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{dash}/>",
            path_data(finite),
            escape(&ser.color)
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" fill=\"{}\">{}</text>",
            WIDTH - MARGIN - 120.0,
            MARGIN + 16.0 * (k as f64 + 1.0),
            escape(&ser.color),
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Bounding box of a set of polylines, padded by 5% (never empty).
fn bounds<'a>(lines: impl IntoIterator<Item = &'a Vec<Point>>) -> (f64, f64, f64, f64) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in lines.into_iter().flatten() {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    if !x0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
    (x0 - pad, x1 + pad, y0 - pad, y1 + pad)
}

/// Panel drawing `lines` scaled uniformly into the box at `(left, top)` of the given size.
fn panel(s: &mut String, lines: &[Vec<Point>], frame: (f64, f64, f64, f64), left: f64, top: f64, size: f64, color: &str) {
    let (x0, x1, y0, y1) = frame;
    let scale = size / (x1 - x0).max(y1 - y0);
    for line in lines {
        let pts = line.iter().map(|p| (left + (p.x - x0) * scale, top + size - (p.y - y0) * scale));
        let _ = writeln!(s, "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>", path_data(pts));
    }
}

/// Chart view of closed or pinned curves with a title.
pub fn curves_svg(curves: &[DiscreteCurve], title: &str) -> String {
    let lines: Vec<Vec<Point>> = curves.iter().map(polyline).collect();
    let size = HEIGHT - 2.0 * MARGIN;
    let mut s = header(size + 2.0 * MARGIN, HEIGHT);
    let _ = writeln!(s, "<text x=\"{MARGIN}\" y=\"30\" font-size=\"14\">{}</text>", escape(title));
    panel(&mut s, &lines, bounds(&lines), MARGIN, MARGIN, size, "black");
    s.push_str("</svg>\n");
    s
}

/// Grid of panels, one per sweepout slice, on a common chart frame, each labeled with its
/// parameter and functional value.
pub fn filmstrip_svg(bundle: &SweepoutBundle, columns: usize) -> String {
    let slices: Vec<Vec<Vec<Point>>> =
        bundle.slice_curves().iter().map(|curves| curves.iter().map(polyline).collect()).collect();
    let frame = bounds(slices.iter().flatten());
    let columns = columns.clamp(1, slices.len().max(1));
    let rows = slices.len().div_ceil(columns).max(1);
    let cell = 160.0;
    let mut s = header(columns as f64 * cell, rows as f64 * (cell + 20.0));
    for (k, lines) in slices.iter().enumerate() {
        let left = (k % columns) as f64 * cell;
        let top = (k / columns) as f64 * (cell + 20.0);
        let _ = writeln!(
            s,
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"none\" stroke=\"#ccc\"/>",
            left + 4.0,
            top + 4.0,
            cell - 8.0,
            cell - 8.0
        );
        panel(&mut s, lines, frame, left + 8.0, top + 8.0, cell - 16.0, "black");
        let _ = writeln!(
            s,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\">t = {:.3}, value = {:.4}</text>",
            left + 8.0,
            top + cell + 12.0,
            bundle.params[k],
            bundle.values[k]
        );
    }
    s.push_str("</svg>\n");
    s
}
