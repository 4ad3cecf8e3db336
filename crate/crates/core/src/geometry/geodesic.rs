//! Two-point geodesic problems by Newton shooting on the initial velocity.

use nalgebra::Matrix2;

use super::{ode, Point, SurfaceModel, Vec2};
use crate::error::{Error, Result};

/// Geodesic `t -> exp_start(t * velocity)`, `t` in `[0, 1]`, in the universal cover.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicSegment {
    pub start: Point,
    pub end: Point,
    pub velocity: Vec2,
    pub length: f64,
    steps: usize,
}

const STEP_LENGTH: f64 = 0.005;

fn steps_for(length: f64) -> usize {
    ((length / STEP_LENGTH).ceil() as usize).max(4)
}

impl GeodesicSegment {
    /// Point at parameter `t` in `[0, 1]`.
    pub fn point_at(&self, surface: &SurfaceModel, t: f64) -> Result<Point> {
        if t <= 0.0 {
            return Ok(self.start);
        }
        if t >= 1.0 {
            return Ok(self.end);
        }
        if surface.is_flat() {
            return Ok(self.start + self.velocity * t);
        }
        let steps = ((self.steps as f64 * t).ceil() as usize).max(2);
        Ok(ode::integrate_fixed(surface, self.start, self.velocity * t, 1.0, steps)?.0)
    }

    /// `k + 1` equally spaced points including both endpoints.
    pub fn sample(&self, surface: &SurfaceModel, k: usize) -> Result<Vec<Point>> {
        let k = k.max(1);
        let mut out = Vec::with_capacity(k + 1);
        out.push(self.start);
        if surface.is_flat() {
            for i in 1..k {
                out.push(self.start + self.velocity * (i as f64 / k as f64));
            }
        } else {
            let per = self.steps.div_ceil(k);
            let h = 1.0 / k as f64;
            let (mut x, mut v) = (self.start, self.velocity);
            for _ in 1..k {
                let (nx, nv) = ode::integrate_fixed(surface, x, v, h, per.max(1))?;
                x = nx;
                v = nv;
                out.push(x);
            }
        }
        out.push(self.end);
        Ok(out)
    }

    /// Initial velocity in chart components; its metric norm is the length.
    pub fn initial_velocity(&self) -> Vec2 {
        self.velocity
    }
}

/// Solves for the geodesic from `a` to `b` close to the chart segment between them.
pub fn solve_geodesic(surface: &SurfaceModel, a: &Point, b: &Point, tol: f64) -> Result<GeodesicSegment> {
    surface.check_chart(a)?;
    surface.check_chart(b)?;
    let chord = surface.chord_length(a, b);
    if surface.is_flat() || chord == 0.0 {
        return Ok(GeodesicSegment { start: *a, end: *b, velocity: b - a, length: chord, steps: 1 });
    }
    let steps = steps_for(chord);
    let shoot = |v: &Vec2| -> Result<Point> { Ok(ode::integrate_fixed(surface, *a, *v, 1.0, steps)?.0) };
    let scale = (b - a).norm().max(1e-300);
    let mut v = b - a;
    let mut hit = shoot(&v)?;
    let mut res = hit - b;
    let tol_abs = tol * (1.0 + scale);
    for _ in 0..60 {
        if res.norm() <= tol_abs {
            let length = surface.norm(a, &v);
            return Ok(GeodesicSegment { start: *a, end: *b, velocity: v, length, steps });
        }
        let eps = 1e-7 * v.norm().max(1e-6);
        let c0 = (shoot(&(v + Vec2::new(eps, 0.0)))? - hit) / eps;
        let c1 = (shoot(&(v + Vec2::new(0.0, eps)))? - hit) / eps;
        let jac = Matrix2::from_columns(&[c0, c1]);
        let delta = jac
            .try_inverse()
            .ok_or_else(|| Error::GeodesicSubproblemFailure("singular shooting Jacobian (conjugate point)".into()))?
            * (-res);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = v + delta * lambda;
            if let Ok(p) = shoot(&trial) {
                let r = p - b;
                if r.norm() < res.norm() {
                    v = trial;
                    hit = p;
                    res = r;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            if res.norm() <= 1e3 * tol_abs {
                break;
            }
            return Err(Error::GeodesicSubproblemFailure(format!("shooting stalled at residual {:e}", res.norm())));
        }
    }
    if res.norm() <= 1e3 * tol_abs {
        let length = surface.norm(a, &v);
        return Ok(GeodesicSegment { start: *a, end: *b, velocity: v, length, steps });
    }
    Err(Error::GeodesicSubproblemFailure(format!("no convergence, residual {:e}", res.norm())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_geodesic_is_straight() {
        let s = SurfaceModel::flat_square(1.0);
        let g = solve_geodesic(&s, &Point::new(0.1, 0.2), &Point::new(0.4, 0.6), 1e-12).unwrap();
        assert!((g.length - 0.5).abs() < 1e-15);
        let mid = g.point_at(&s, 0.5).unwrap();
        assert!((mid - Point::new(0.25, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn sphere_geodesic_length_matches_great_circle() {
        let s = SurfaceModel::sphere(1.0);
        let a = Point::new(1.0, 0.0);
        let b = Point::new(1.3, 0.8);
        let g = solve_geodesic(&s, &a, &b, 1e-12).unwrap();
        let emb = |p: &Point| nalgebra::Vector3::new(p.x.sin() * p.y.cos(), p.x.sin() * p.y.sin(), p.x.cos());
        let expected = emb(&a).dot(&emb(&b)).acos();
        assert!((g.length - expected).abs() < 1e-8);
        let pts = g.sample(&s, 8).unwrap();
        assert_eq!(pts.len(), 9);
        let quarter = emb(&a).dot(&emb(&pts[2])).acos();
        assert!((quarter - expected / 4.0).abs() < 1e-7);
    }
}
