//! Geodesic ODE integrators: adaptive Dormand-Prince 5(4) and fixed-step RK4.

use super::{Point, SurfaceModel, Vec2};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-8,
            atol: 1e-11,
            initial_step: 0.05,
            min_step: 1e-12,
            max_steps: 200_000,
        }
    }
}

type State = [f64; 4];

fn rhs(surface: &SurfaceModel, y: &State) -> State {
    let x = Point::new(y[0], y[1]);
    let v = Vec2::new(y[2], y[3]);
    let a = -surface.christoffel(&x, &v, &v);
    [v.x, v.y, a.x, a.y]
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn finite(y: &State) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrates the geodesic equation over `[0, t_end]` with adaptive step control.
pub fn integrate_adaptive(
    surface: &SurfaceModel,
    x: Point,
    v: Vec2,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<(Point, Vec2)> {
    let mut y: State = [x.x, x.y, v.x, v.y];
    if t_end == 0.0 {
        return Ok((x, v));
    }
    let speed = v.norm().max(1e-300);
    let mut t = 0.0;
    let mut h = (cfg.initial_step / speed).min(t_end);
    let mut k1 = rhs(surface, &y);
    let mut steps = 0;
    while t < t_end {
        if steps >= cfg.max_steps {
            return Err(Error::StepFailure(format!("step budget exhausted at t = {t}")));
        }
        steps += 1;
        if t + h > t_end {
            h = t_end - t;
        }
        let k2 = rhs(surface, &axpy(&y, h, &[(1.0 / 5.0, &k1)]));
        let k3 = rhs(surface, &axpy(&y, h, &[(3.0 / 40.0, &k1), (9.0 / 40.0, &k2)]));
        let k4 = rhs(
            surface,
            &axpy(&y, h, &[(44.0 / 45.0, &k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)]),
        );
        let k5 = rhs(
            surface,
            &axpy(
                &y,
                h,
                &[
                    (19372.0 / 6561.0, &k1),
                    (-25360.0 / 2187.0, &k2),
                    (64448.0 / 6561.0, &k3),
                    (-212.0 / 729.0, &k4),
                ],
            ),
        );
        let k6 = rhs(
            surface,
            &axpy(
                &y,
                h,
                &[
                    (9017.0 / 3168.0, &k1),
                    (-355.0 / 33.0, &k2),
                    (46732.0 / 5247.0, &k3),
                    (49.0 / 176.0, &k4),
                    (-5103.0 / 18656.0, &k5),
                ],
            ),
        );
        let y5 = axpy(
            &y,
            h,
            &[
                (35.0 / 384.0, &k1),
                (500.0 / 1113.0, &k3),
                (125.0 / 192.0, &k4),
                (-2187.0 / 6784.0, &k5),
                (11.0 / 84.0, &k6),
            ],
        );
        let k7 = rhs(surface, &y5);
        let e = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let ks = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let mut ei = 0.0;
            for (c, k) in e.iter().zip(ks.iter()) {
                ei += c * k[i];
            }
            let scale = cfg.atol + cfg.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((h * ei).abs() / scale);
        }
        if !finite(&y5) || !err.is_finite() {
            h *= 0.25;
            if h < cfg.min_step {
                return Err(Error::StepFailure("non-finite state".into()));
            }
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            k1 = k7;
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < cfg.min_step {
                return Err(Error::StepFailure(format!("step {h:e} below minimum at t = {t}")));
            }
        }
    }
    Ok((Point::new(y[0], y[1]), Vec2::new(y[2], y[3])))
}

/// Fixed-step classical RK4 over `[0, t_end]`; smooth in the initial data.
pub fn integrate_fixed(
    surface: &SurfaceModel,
    x: Point,
    v: Vec2,
    t_end: f64,
    steps: usize,
) -> Result<(Point, Vec2)> {
    let mut y: State = [x.x, x.y, v.x, v.y];
    let steps = steps.max(1);
    let h = t_end / steps as f64;
    for _ in 0..steps {
        let k1 = rhs(surface, &y);
        let k2 = rhs(surface, &axpy(&y, h, &[(0.5, &k1)]));
        let k3 = rhs(surface, &axpy(&y, h, &[(0.5, &k2)]));
        let k4 = rhs(surface, &axpy(&y, h, &[(1.0, &k3)]));
        y = axpy(&y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]);
    }
    if !finite(&y) {
        return Err(Error::StepFailure("non-finite state in fixed-step integration".into()));
    }
    let p = Point::new(y[0], y[1]);
    surface.check_chart(&p)?;
    Ok((p, Vec2::new(y[2], y[3])))
}
