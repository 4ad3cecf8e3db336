//! Damped Newton solver for boundaries of constant geodesic curvature.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::FlowConfig;
use crate::curve::{ac_functional, detect_node, lift_contact, stencil_at, DiscreteCurve, LiftContact, Region};
use crate::error::{Error, Result};
use crate::geometry::{Point, SurfaceModel, Vec2};

/// State of the solver after an accepted Newton step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub step: usize,
    pub length: f64,
    pub area: f64,
    pub ac: f64,
    pub max_residual: f64,
}

const FD_STEP: f64 = 1e-7;
const RESAMPLE_RATIO: f64 = 1.5;
const LINE_SEARCH_HALVINGS: usize = 30;
const TRUST_FRACTION: f64 = 0.1;
const LAMBDA_FLOOR: f64 = 1e-9;
const STALL_WINDOW: usize = 5;
const STALL_RATIO: f64 = 0.5;
const LAMBDA_GROWTH: f64 = 10.0;
const SINGULAR_CUTOFF: f64 = 1e-10;

/// Signed curvature residual of vertex `i` with the chart positions `p`, `x`, `q`.
fn local_residual(surface: &SurfaceModel, p: &Point, x: &Point, q: &Point, side: f64, c: f64, i: usize) -> Result<f64> {
    let (t_in, t_out, l_in, l_out) = stencil_at(surface, p, x, q).ok_or(Error::DegenerateVertex(i))?;
    Ok(side * surface.signed_angle(x, &t_in, &t_out) / (0.5 * (l_in + l_out)) - c)
}

fn residuals(surface: &SurfaceModel, curve: &DiscreteCurve, sides: &[f64], c: f64) -> Result<Vec<f64>> {
    let kappa = curve.geodesic_curvature(surface)?;
    Ok(kappa.iter().zip(sides).map(|(k, s)| if *s == 0.0 { 0.0 } else { s * k - c }).collect())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn offset(surface: &SurfaceModel, x: &Point, normal: &Vec2, u: f64) -> Point {
    let v = normal * u;
    x + v - surface.christoffel(x, &v, &v) * 0.5
}

/// Finite-difference Jacobian of the residuals with respect to normal offsets.
fn jacobian(surface: &SurfaceModel, curve: &DiscreteCurve, normals: &[Vec2], sides: &[f64], c: f64, base: &[f64]) -> Result<DMatrix<f64>> {
    let n = curve.len();
    let mut jac = DMatrix::zeros(n, n);
    let h = FD_STEP * curve.length(surface) / n as f64;
    for j in 0..n {
        if sides[j] == 0.0 {
            continue;
        }
        let moved = offset(surface, &curve.vertices[j], &normals[j], h);
        // Vertex j enters the stencils of j - 1, j and j + 1 (through the closing shift at the ends).
        for di in [-1isize, 0, 1] {
            let i = (j as isize + di).rem_euclid(n as isize) as usize;
            if sides[i] == 0.0 {
                continue;
            }
            let at = |k: isize| -> Point {
                if k.rem_euclid(n as isize) as usize == j {
                    moved + (curve.vertex(k) - curve.vertices[j])
                } else {
                    curve.vertex(k)
                }
            };
            let ii = i as isize;
            let r = local_residual(surface, &at(ii - 1), &at(ii), &at(ii + 1), sides[i], c, i)?;
            jac[(i, j)] = (r - base[i]) / h;
        }
    }
    Ok(jac)
}

fn apply_step(surface: &SurfaceModel, curve: &DiscreteCurve, normals: &[Vec2], step: &DVector<f64>, scale: f64) -> Result<DiscreteCurve> {
    let vertices = curve
        .vertices
        .iter()
        .zip(normals)
        .zip(step.iter())
        .map(|((x, nu), u)| {
            let y = offset(surface, x, nu, scale * u);
            surface.check_chart(&y)?;
            Ok(y)
        })
        .collect::<Result<Vec<Point>>>()?;
    Ok(DiscreteCurve { vertices, kind: curve.kind })
}

/// Moves every witness by the displacement of the nearest boundary vertex between `before`
/// and `after`, which list the same vertices in the same order.
fn carry_witnesses(witnesses: &[Point], before: &[DiscreteCurve], after: &[DiscreteCurve]) -> Vec<Point> {
    witnesses
        .iter()
        .map(|w| {
            let pairs = before.iter().zip(after).flat_map(|(b, a)| b.vertices.iter().zip(&a.vertices));
            pairs.min_by(|p, q| (p.0 - w).norm().total_cmp(&(q.0 - w).norm())).map_or(*w, |(b, a)| w + (a - b))
        })
        .collect()
}

/// Deforms the boundary of `seed` until its curvature toward the region equals `c`.
pub fn solve_prescribed_curvature(surface: &SurfaceModel, c: f64, seed: &Region, cfg: &FlowConfig) -> Result<Region> {
    Ok(solve_with_trace(surface, c, seed, cfg)?.0)
}

/// As [`solve_prescribed_curvature`], also returning one record per accepted step.
///
/// Boundary curves must be embedded; loops that do not bound the region are left fixed.
pub fn solve_with_trace(surface: &SurfaceModel, c: f64, seed: &Region, cfg: &FlowConfig) -> Result<(Region, Vec<FlowRecord>)> {
    if seed.boundary.is_empty() {
        return Err(Error::Invalid("seed region has no boundary".into()));
    }
    for curve in &seed.boundary {
        if detect_node(surface, curve)?.is_some() {
            return Err(Error::Invalid("seed boundary must be embedded".into()));
        }
    }
    let sides: Vec<Vec<f64>> = seed.side_signs().to_vec();
    let mut curves = seed.boundary.clone();
    let record = |step: usize, curves: &[DiscreteCurve], witnesses: &[Point], max_residual: f64| -> Result<(Region, FlowRecord)> {
        let region = Region::new(surface, curves.to_vec(), witnesses.to_vec())?;
        let rec = FlowRecord {
            step,
            length: region.boundary_length(surface),
            area: region.area(),
            ac: ac_functional(surface, &region, c),
            max_residual,
        };
        Ok((region, rec))
    };
    let total_residual = |curves: &[DiscreteCurve]| -> Result<Vec<Vec<f64>>> {
        curves.iter().zip(&sides).map(|(cv, s)| residuals(surface, cv, s, c)).collect()
    };
    let mut res = total_residual(&curves)?;
    let worst = |r: &[Vec<f64>]| r.iter().map(|v| max_abs(v)).fold(0.0, f64::max);
    let norm2 = |r: &[Vec<f64>]| r.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let mut witnesses = seed.witnesses.clone();
    // Damping floor: keeps steps off the near-kernel of symmetric problems and is relaxed
    // whenever progress stalls, which lets the disk drift on inhomogeneous metrics.
    let mut floor = LAMBDA_FLOOR;
    let mut lambda = floor;
    let mut history = Vec::new();
    let (mut region, first) = record(0, &curves, &witnesses, worst(&res))?;
    let mut trace = vec![first];
    for step in 1..=cfg.newton_iterations {
        if worst(&res) <= cfg.residual {
            return Ok((region, trace));
        }
        let mut systems = Vec::with_capacity(curves.len());
        let mut all_normals = Vec::with_capacity(curves.len());
        for (k, curve) in curves.iter().enumerate() {
            let normals = curve.left_normals(surface)?;
            let jac = jacobian(surface, curve, &normals, &sides[k], c, &res[k])?;
            let svd = jac.svd(true, true);
            let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
                return Err(Error::NoConvergence { residual: worst(&res), iterations: step });
            };
            let projected = u.transpose() * DVector::from_column_slice(&res[k]);
            systems.push((svd.singular_values, projected, v_t));
            all_normals.push(normals);
        }
        let sigma_max = systems.iter().map(|(s, _, _)| s.max()).fold(0.0, f64::max);
        let current = norm2(&res);
        let mut accepted = None;
        for _ in 0..LINE_SEARCH_HALVINGS {
            // Levenberg-Marquardt step with damping `lambda * sigma_max^2`; singular values below
            // the cutoff (the kernel of isometry-invariant problems) are dropped.
            let shift = lambda * sigma_max * sigma_max;
            let directions: Vec<DVector<f64>> = systems
                .iter()
                .map(|(sv, proj, v_t)| {
                    let coeffs = DVector::from_iterator(
                        sv.len(),
                        sv.iter().zip(proj.iter()).map(|(&s, &p)| {
                            if s <= SINGULAR_CUTOFF * sigma_max {
                                0.0
                            } else {
                                -s * p / (s * s + shift)
                            }
                        }),
                    );
                    v_t.transpose() * coeffs
                })
                .zip(&curves)
                .map(|(d, cv): (DVector<f64>, &DiscreteCurve)| {
                    // Trust region: no vertex moves further than a fraction of the loop's radius.
                    let cap = TRUST_FRACTION * cv.length(surface) / (2.0 * std::f64::consts::PI);
                    let big = d.amax();
                    if big > cap { d * (cap / big) } else { d }
                })
                .collect();
            let trial: Result<Vec<DiscreteCurve>> = curves
                .iter()
                .zip(&all_normals)
                .zip(&directions)
                .map(|((cv, nu), d)| apply_step(surface, cv, nu, d, cfg.damping))
                .collect();
            if let Ok(trial) = trial {
                if let Ok(r) = total_residual(&trial) {
                    if norm2(&r) < current {
                        accepted = Some((trial, r));
                        break;
                    }
                }
            }
            lambda = (lambda * LAMBDA_GROWTH).max(LAMBDA_FLOOR);
        }
        lambda /= LAMBDA_GROWTH;
        if lambda < floor {
            lambda = floor;
        }
        let Some((mut next, mut next_res)) = accepted else {
            return Err(Error::NoConvergence { residual: worst(&res), iterations: step });
        };
        let carried = carry_witnesses(&witnesses, &curves, &next);
        let mut resampled = false;
        for cv in next.iter_mut() {
            if cv.spacing_ratio(surface) > RESAMPLE_RATIO {
                *cv = cv.resample(surface, cv.len())?;
                resampled = true;
            }
        }
        if resampled {
            next_res = total_residual(&next)?;
        }
        for cv in &next {
            let mean = cv.length(surface) / cv.segment_count() as f64;
            match lift_contact(surface, cv, 1e-9 * mean)? {
                LiftContact::Embedded { .. } => {}
                other => return Err(Error::EmbeddednessLost(format!("{other:?}"))),
            }
        }
        curves = next;
        res = next_res;
        history.push(worst(&res));
        if history.len() > STALL_WINDOW && history[history.len() - 1] > STALL_RATIO * history[history.len() - 1 - STALL_WINDOW] {
            floor *= 1e-3;
            history.clear();
        }
        let (mut r, mut rec) = record(step, &curves, &witnesses, worst(&res))?;
        if r.side_signs() != sides.as_slice() {
            // The boundary moved across a witness: follow the nearest vertex instead.
            (r, rec) = record(step, &curves, &carried, worst(&res))?;
            if r.side_signs() != sides.as_slice() {
                return Err(Error::EmbeddednessLost("region side changed during the solve".into()));
            }
            witnesses = carried;
        }
        region = r;
        trace.push(rec);
    }
    if worst(&res) <= cfg.residual {
        return Ok((region, trace));
    }
    Err(Error::NoConvergence { residual: worst(&res), iterations: cfg.newton_iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::fixtures::{circle, latitude};
    use std::f64::consts::PI;

    #[test]
    fn sphere_cap_of_unit_curvature() {
        let s = SurfaceModel::sphere(1.0);
        let seed = Region::new(&s, vec![latitude(0.6, 128)], vec![Point::new(0.1, 0.0)]).unwrap();
        let (out, trace) = solve_with_trace(&s, 1.0, &seed, &FlowConfig::default()).unwrap();
        assert!((out.boundary_length(&s) - PI * 2f64.sqrt()).abs() < 1e-3, "{}", out.boundary_length(&s));
        assert!(trace.last().unwrap().max_residual <= 1e-9);
        let rho: Vec<f64> = out.boundary[0].vertices.iter().map(|p| p.x).collect();
        assert!(rho.iter().all(|r| (r - PI / 4.0).abs() < 1e-3));
    }

    #[test]
    fn torus_disk_of_curvature_three_halves() {
        let s = SurfaceModel::flat_square(2.0);
        let seed = Region::new(&s, vec![circle(Point::new(1.0, 1.0), 0.5, 96)], vec![Point::new(1.0, 1.0)]).unwrap();
        let out = solve_prescribed_curvature(&s, 1.5, &seed, &FlowConfig::default()).unwrap();
        assert!((out.boundary_length(&s) - 4.0 * PI / 3.0).abs() < 1e-3);
        let k = out.geodesic_curvature(&s).unwrap();
        assert!(k[0].iter().all(|k| (k - 1.5).abs() < 1e-8));
    }

    #[test]
    fn oversized_disk_loses_embeddedness() {
        let s = SurfaceModel::flat_square(2.0);
        let seed = Region::new(&s, vec![circle(Point::new(1.0, 1.0), 0.9, 96)], vec![Point::new(1.0, 1.0)]).unwrap();
        let err = solve_prescribed_curvature(&s, 0.9, &seed, &FlowConfig::default()).unwrap_err();
        assert!(matches!(err, Error::EmbeddednessLost(_) | Error::NoConvergence { .. }), "{err:?}");
    }

    #[test]
    fn perturbed_seeds_reach_the_same_length() {
        let s = SurfaceModel::flat_square(4.0);
        let lengths: Vec<f64> = [0.0, 0.05, 0.1]
            .iter()
            .map(|eps| {
                let v: Vec<Point> = (0..96)
                    .map(|k| {
                        let t = 2.0 * PI * k as f64 / 96.0;
                        let r = 0.8 * (1.0 + eps * (3.0 * t).cos());
                        Point::new(2.0 + r * t.cos(), 2.0 + r * t.sin())
                    })
                    .collect();
                let c = DiscreteCurve::closed(v, Vec2::zeros()).unwrap();
                let seed = Region::new(&s, vec![c], vec![Point::new(2.0, 2.0)]).unwrap();
                solve_prescribed_curvature(&s, 1.0, &seed, &FlowConfig::default()).unwrap().boundary_length(&s)
            })
            .collect();
        for l in &lengths {
            assert!((l - 2.0 * PI).abs() < 1e-6, "{l}");
        }
    }
}
