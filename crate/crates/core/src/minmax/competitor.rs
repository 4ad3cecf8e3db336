//! Competitor sweepouts: the Config-1 assembly from cut-and-paste surgeries, the
//! three-path bound for Config-2 regions, and monotone contraction of disks.

use serde::{Deserialize, Serialize};

use super::{pull_tight_width, sweepout_max, uniform_params, PullTightConfig, SurgerySign, Sweepout, WidthEstimate};
use super::surgery::{cut_and_paste, surgery_radius};
use crate::criteria::gauss_bonnet_bounds;
use crate::curve::{
    ac_functional, detect_node, MIN_VERTICES, second_variation, split_at_node, split_at_node_pinned, Configuration, DiscreteCurve,
    NodeData, Region, TestFunction,
};
use crate::error::{Error, Result};
use crate::geometry::{Point, SurfaceModel, Vec2};
use crate::shortening::{csf_path_to_point, enclosed_area, FlowConfig};

/// Fraction of the initial area between recorded contraction slices.
const RECORD_AREA_STEP: f64 = 0.01;

/// Moves every vertex of a closed loop by `amount[i]` along `normal[i]`.
fn push(surface: &SurfaceModel, curve: &DiscreteCurve, normals: &[Vec2], amount: &[f64]) -> Result<DiscreteCurve> {
    let vertices = curve
        .vertices
        .iter()
        .zip(normals)
        .zip(amount)
        .map(|((x, nu), a)| {
            let w = nu * *a;
            let y = x + w - surface.christoffel(x, &w, &w) * 0.5;
            surface.check_chart(&y)?;
            Ok(y)
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteCurve::closed(vertices, curve.shift())
}

fn centroid(curve: &DiscreteCurve) -> Point {
    let sum = curve.vertices.iter().fold(Vec2::zeros(), |acc, p| acc + p);
    sum / curve.len() as f64
}

/// Shrinks a union of disjoint disks to the empty region by moving every boundary loop
/// inward at speed `max(kappa, c)`, where `kappa` is the curvature toward the region.
///
/// `A^c` is checked after every step and must not increase while the region shrinks; it
/// decreases along the flow only where `kappa >= c`. The returned sweepout runs from the
/// empty region to `region`; a slice is recorded whenever the area has dropped by another
/// percent of the initial area, with the loop centroids as witnesses.
pub fn monotone_contraction(surface: &SurfaceModel, region: &Region, c: f64, cfg: &FlowConfig) -> Result<Sweepout> {
    if region.boundary.is_empty() {
        return Err(Error::Invalid("contraction needs a region with boundary".into()));
    }
    let mut loop_area = 0.0;
    for curve in &region.boundary {
        if !curve.is_closed() || curve.shift().norm() != 0.0 {
            return Err(Error::Invalid("contraction needs contractible boundary loops".into()));
        }
        if detect_node(surface, curve)?.is_some() {
            return Err(Error::Invalid("contraction needs embedded boundary loops".into()));
        }
        loop_area += enclosed_area(surface, curve)?;
    }
    let area0 = region.area();
    if (loop_area - area0).abs() > 1e-6 * area0.max(1e-12) {
        return Err(Error::Invalid(format!(
            "region of area {area0} is not the union of the disks bounded by its loops (total {loop_area})"
        )));
    }
    let mut loops: Vec<(DiscreteCurve, f64, f64)> = region
        .boundary
        .iter()
        .zip(region.side_signs())
        .map(|(cv, s)| Ok((cv.clone(), s[0], enclosed_area(surface, cv)?)))
        .collect::<Result<_>>()?;
    let current_ac = |loops: &[(DiscreteCurve, f64, f64)]| -> Result<f64> {
        let mut total = 0.0;
        for (cv, _, _) in loops {
            total += cv.length(surface) - c * enclosed_area(surface, cv)?;
        }
        Ok(total)
    };
    let spacing = region.boundary_length(surface)
        / region.boundary.iter().map(|cv| cv.segment_count()).sum::<usize>() as f64;
    let mut slices = vec![region.clone()];
    let mut recorded_area = area0;
    let mut before = ac_functional(surface, region, c);
    let mut step = 0;
    while !loops.is_empty() {
        step += 1;
        if step > cfg.max_iterations {
            return Err(Error::IterationBudget(cfg.max_iterations));
        }
        let dt = loops
            .iter()
            .map(|(cv, _, _)| {
                let min = cv.segment_lengths(surface).into_iter().fold(f64::INFINITY, f64::min);
                0.4 * min * min
            })
            .fold(f64::INFINITY, f64::min)
            * cfg.dt_fraction;
        let mut next = Vec::with_capacity(loops.len());
        for (cv, sigma, a0) in &loops {
            let kappa = cv.geodesic_curvature(surface)?;
            let normals: Vec<Vec2> = cv.left_normals(surface)?.iter().map(|nu| nu * *sigma).collect();
            let amount: Vec<f64> = kappa.iter().map(|k| dt * (sigma * k).max(c)).collect();
            let mut moved = push(surface, cv, &normals, &amount)?;
            if step % cfg.resample_every.max(1) == 0 {
                // Keep the initial spacing so the stable time step does not shrink with the loop.
                let count = ((moved.length(surface) / spacing).round() as usize).clamp(2 * MIN_VERTICES, moved.len());
                moved = moved.resample(surface, count)?;
            }
            if enclosed_area(surface, &moved)? >= cfg.area_floor * a0 {
                next.push((moved, *sigma, *a0));
            }
        }
        loops = next;
        let after = current_ac(&loops)?;
        if after > before + 1e-9 * before.abs().max(1.0) {
            return Err(Error::MonotonicityViolation { step, before, after });
        }
        before = after;
        if loops.is_empty() {
            break;
        }
        let area: f64 = loops.iter().map(|l| enclosed_area(surface, &l.0)).sum::<Result<f64>>()?;
        if recorded_area - area >= RECORD_AREA_STEP * area0 {
            recorded_area = area;
            let curves = loops.iter().map(|l| l.0.clone()).collect();
            let witnesses = loops.iter().map(|l| centroid(&l.0)).collect();
            slices.push(Region::new(surface, curves, witnesses)?);
        }
    }
    slices.push(Region::empty());
    slices.reverse();
    let params = uniform_params(slices.len());
    Sweepout::regions(slices, params, area0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompetitorConfig {
    /// Perturbation size; `None` starts from a tenth of the surgery radius.
    pub eps: Option<f64>,
    /// Surgery radius as a fraction of the admissible radius.
    pub radius_fraction: f64,
    /// Slices per assembly step.
    pub steps: usize,
    /// Largest area change between adjacent slices, as a fraction of the region's area.
    pub continuity: f64,
    /// Flow settings of the end contractions.
    pub flow: FlowConfig,
}

impl Default for CompetitorConfig {
    fn default() -> Self {
        CompetitorConfig { eps: None, radius_fraction: 0.5, steps: 8, continuity: 0.02, flow: FlowConfig::default() }
    }
}

/// Surgery sweepout of a Config-1 region along a direction of negative second variation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Config1Competitor {
    pub sweepout: Sweepout,
    pub second_variation: f64,
    pub eps: f64,
    pub radius: f64,
    /// Smallest surgery radius used, twice the overlap radius of the perturbed lobes.
    pub inner_radius: f64,
    /// `A^c` of the unperturbed region.
    pub region_ac: f64,
    pub max: WidthEstimate,
    /// `region_ac - max.value`.
    pub margin: f64,
    /// Outcome of contracting the start slice to the empty region.
    pub start_contraction: std::result::Result<f64, String>,
    /// Outcome of contracting the complement of the end slice.
    pub end_contraction: std::result::Result<f64, String>,
}

/// Point of the fundamental domain farthest from the boundary outside `region`.
fn outside_point(surface: &SurfaceModel, region: &Region, anchor: &Point) -> Option<Point> {
    let periods = surface.periods();
    let mut best: Option<(f64, Point)> = None;
    for i in 0..16 {
        for j in 0..16 {
            let (u, v) = (i as f64 / 16.0, j as f64 / 16.0);
            let p = if periods.len() == 2 {
                anchor + periods[0] * u + periods[1] * v
            } else {
                let SurfaceModel::Revolution(rev) = surface else { return None };
                Point::new(rev.profile.extent() * (0.05 + 0.9 * u), anchor.y + periods[0].y * v)
            };
            if surface.check_chart(&p).is_err() || region.contains(&p) {
                continue;
            }
            let d = region.distance_to_boundary(&p);
            if best.is_none_or(|(b, _)| d > b) {
                best = Some((d, p));
            }
        }
    }
    best.map(|(_, p)| p)
}

/// Assembles the surgery sweepout around a Config-1 region: minus surgeries at full
/// radius while the perturbation grows to `eps`, minus surgeries with the radius shrinking
/// to the smallest ball containing the lobe overlap, plus surgeries with the radius growing
/// back, and plus surgeries while the perturbation returns to zero. The end contractions
/// are attempted and reported separately.
pub fn competitor_sweepout_config1(
    surface: &SurfaceModel,
    region: &Region,
    node: &NodeData,
    phi: &TestFunction,
    c: f64,
    cfg: &CompetitorConfig,
) -> Result<Config1Competitor> {
    if region.boundary.len() != 1 || node.config != Configuration::Config1 {
        return Err(Error::Invalid("competitor needs a single boundary curve with a Config-1 node".into()));
    }
    let curve = &region.boundary[0];
    let q = second_variation(surface, curve, Some(node), phi, c)?;
    if !(q < 0.0) {
        return Err(Error::NoNegativeDirection(q));
    }
    let region_ac = ac_functional(surface, region, c);
    let radius = cfg.radius_fraction * surgery_radius(surface, curve, node, c);
    let surgery = |s: f64, r: f64, sign: SurgerySign| cut_and_paste(surface, region, node, phi, s, r, sign, c);
    let mut eps = cfg.eps.unwrap_or(0.1 * radius);
    let mut inner_radius = None;
    for _ in 0..40 {
        let minus = surgery(eps, radius, SurgerySign::Minus);
        let plus = surgery(eps, radius, SurgerySign::Plus);
        if let (Ok(m), Ok(_)) = (&minus, &plus) {
            if m.perturbed_ac < region_ac && 2.0 * m.overlap < radius {
                inner_radius = Some((2.0 * m.overlap).max(1e-3 * radius));
                break;
            }
        }
        eps *= 0.5;
    }
    let Some(inner_radius) = inner_radius else {
        return Err(Error::Invalid("no perturbation size lowers A^c with admissible surgeries".into()));
    };
    let k = cfg.steps.max(1);
    let frac = |i: usize| i as f64 / k as f64;
    let slice = |s: f64, r: f64, sign: SurgerySign| surgery(s, r, sign).map(|out| out.region);
    let mut slices = Vec::with_capacity(4 * k + 2);
    for i in 0..=k {
        slices.push(slice(eps * frac(i), radius, SurgerySign::Minus)?);
    }
    for i in 1..=k {
        slices.push(slice(eps, radius - (radius - inner_radius) * frac(i), SurgerySign::Minus)?);
    }
    for i in 0..=k {
        slices.push(slice(eps, inner_radius + (radius - inner_radius) * frac(i), SurgerySign::Plus)?);
    }
    for i in 1..=k {
        slices.push(slice(eps * (1.0 - frac(i)), radius, SurgerySign::Plus)?);
    }
    let start = slices[0].clone();
    let end = slices.last().unwrap().clone();
    let params = uniform_params(slices.len());
    let sweepout = Sweepout::regions(slices, params, cfg.continuity * region.area())?;
    let max = sweepout_max(surface, &sweepout, c);
    let contraction_max = |r: &Region| -> std::result::Result<f64, String> {
        monotone_contraction(surface, r, c, &cfg.flow)
            .map(|sw| sweepout_max(surface, &sw, c).value)
            .map_err(|e| format!("{}: {e}", e.kind()))
    };
    let start_contraction = contraction_max(&start);
    let end_contraction = match outside_point(surface, &end, &node.point) {
        Some(w) => end.complement(surface, vec![w]).map_err(|e| format!("{}: {e}", e.kind())).and_then(|r| contraction_max(&r)),
        None => Err("no witness point outside the end slice".into()),
    };
    Ok(Config1Competitor {
        margin: region_ac - max.value,
        sweepout,
        second_variation: q,
        eps,
        radius,
        inner_radius,
        region_ac,
        max,
        start_contraction,
        end_contraction,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub flow: FlowConfig,
    pub pull: PullTightConfig,
}

/// Three-path upper bound for the width of a Config-2 region.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PositiveBound {
    /// `max{length(first), pulled width, length(second)}`.
    pub bound: f64,
    pub first_length: f64,
    pub second_length: f64,
    pub width: WidthEstimate,
    /// Longest curve of the shortening flow from the first loop, when it ran.
    pub path1_max_length: Option<f64>,
    /// The flow shrank the first loop to a point inside the chart.
    pub path1_complete: bool,
    pub path1_diagnostic: Option<String>,
    pub path3_diagnostic: Option<String>,
    /// Gauss-Bonnet lower bound for the width.
    pub lower_bound: f64,
    /// `bound >= lower_bound`.
    pub consistent: bool,
}

/// Upper bound for the width of a region whose boundary has a Config-2 node: the first
/// sub-loop shrinks to a point by curve shortening, a pulled-tight path family joins it
/// to the second sub-loop, and the second sub-loop contracts.
pub fn competitor_bound_positive(surface: &SurfaceModel, region: &Region, c: f64, cfg: &BoundConfig) -> Result<PositiveBound> {
    if region.boundary.len() != 1 {
        return Err(Error::Invalid("bound needs a region bounded by a single curve".into()));
    }
    let curve = &region.boundary[0];
    let node = detect_node(surface, curve)?.ok_or_else(|| Error::Invalid("boundary has no node".into()))?;
    if node.config != Configuration::Config2 {
        return Err(Error::Invalid("bound needs a Config-2 node".into()));
    }
    let (first, second) = split_at_node_pinned(curve, &node)?;
    let (first_loop, second_loop) = split_at_node(curve, &node)?;
    let (p, q) = first.endpoints();
    let tol = 1e-9 * (1.0 + p.norm() + q.norm());
    let matches = |cv: &DiscreteCurve| {
        let (a, b) = cv.endpoints();
        (a - p).norm() < tol && (b - q).norm() < tol
    };
    let reversed = second.reversed().translated(&(-curve.shift()));
    let shifted = second.translated(&(-node.shift));
    let second = if matches(&reversed) {
        reversed
    } else if matches(&shifted) {
        shifted
    } else {
        return Err(Error::Invalid("sub-loops cannot be pinned at common endpoints".into()));
    };
    let first_length = first.length(surface);
    let second_length = second.length(surface);
    let (path1_max_length, path1_complete, path1_diagnostic) = match csf_path_to_point(surface, &first_loop, &cfg.flow) {
        Ok(path) => {
            let complete = path.collapse_point.is_some() && !path.reached_chart_edge;
            let note = (!complete).then(|| "flow stopped at the chart edge before collapsing".to_string());
            (Some(path.max_length), complete, note)
        }
        Err(e) => (None, false, Some(format!("{}: {e}", e.kind()))),
    };
    let width = pull_tight_width(surface, region, &first, &second, &cfg.pull)?;
    let path3_diagnostic = Region::new(surface, vec![second_loop.clone()], vec![centroid(&second_loop)])
        .and_then(|disk| monotone_contraction(surface, &disk, c, &cfg.flow))
        .err()
        .map(|e| format!("{}: {e}", e.kind()));
    let bound = width.value;
    let min_k = surface.surface_stats().min_k.value;
    let lower_bound = gauss_bonnet_bounds(region.area(), region.boundary_length(surface), min_k, c).width_lower_bound;
    Ok(PositiveBound {
        bound,
        first_length,
        second_length,
        width,
        path1_max_length,
        path1_complete,
        path1_diagnostic,
        path3_diagnostic,
        lower_bound,
        consistent: bound >= lower_bound - 1e-9 * bound.abs().max(1.0),
    })
}
