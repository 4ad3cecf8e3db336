//! Periodic bicubic B-spline interpolation on a uniform grid over the unit square.

/// Value and derivatives of a scalar field with respect to the unit-square coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSpline {
    n1: usize,
    n2: usize,
    coef: Vec<f64>,
}

/// First row of the inverse of the circulant (1/6, 2/3, 1/6) matrix.
fn inverse_circulant_row(n: usize) -> Vec<f64> {
    let mut row = vec![0.0; n];
    for (k, slot) in row.iter_mut().enumerate() {
        let mut acc = 0.0;
        for m in 0..n {
            let theta = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
            let lambda = 2.0 / 3.0 + theta.cos() / 3.0;
            acc += (theta * k as f64).cos() / lambda;
        }
        *slot = acc / n as f64;
    }
    row
}

fn basis(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    let u = 1.0 - t;
    [
        u * u * u / 6.0,
        (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
        (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0,
        t3 / 6.0,
    ]
}

fn basis_d1(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let u = 1.0 - t;
    [
        -u * u / 2.0,
        (9.0 * t2 - 12.0 * t) / 6.0,
        (-9.0 * t2 + 6.0 * t + 3.0) / 6.0,
        t2 / 2.0,
    ]
}

fn basis_d2(t: f64) -> [f64; 4] {
    [1.0 - t, 3.0 * t - 2.0, -3.0 * t + 1.0, t]
}

impl PeriodicSpline {
    /// Interpolates `samples[i * n2 + j]`, the field value at `(i / n1, j / n2)`.
    pub fn interpolate(n1: usize, n2: usize, samples: &[f64]) -> Self {
        assert_eq!(samples.len(), n1 * n2);
        let r1 = inverse_circulant_row(n1);
        let r2 = inverse_circulant_row(n2);
        let mut tmp = vec![0.0; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                let mut acc = 0.0;
                for l in 0..n2 {
                    acc += r2[(j + n2 - l) % n2] * samples[i * n2 + l];
                }
                tmp[i * n2 + j] = acc;
            }
        }
        let mut coef = vec![0.0; n1 * n2];
        for j in 0..n2 {
            for i in 0..n1 {
                let mut acc = 0.0;
                for k in 0..n1 {
                    acc += r1[(i + n1 - k) % n1] * tmp[k * n2 + j];
                }
                coef[i * n2 + j] = acc;
            }
        }
        PeriodicSpline { n1, n2, coef }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    /// Evaluates the spline and its derivatives at unit-square coordinates (periodic).
    pub fn jet(&self, xi: f64, eta: f64) -> Jet2 {
        let x = xi * self.n1 as f64;
        let y = eta * self.n2 as f64;
        let i0 = x.floor();
        let j0 = y.floor();
        let tx = x - i0;
        let ty = y - j0;
        let (bx, dbx, ddbx) = (basis(tx), basis_d1(tx), basis_d2(tx));
        let (by, dby, ddby) = (basis(ty), basis_d1(ty), basis_d2(ty));
        let n1 = self.n1 as i64;
        let n2 = self.n2 as i64;
        let mut jet = Jet2::default();
        for a in 0..4 {
            let i = (i0 as i64 - 1 + a as i64).rem_euclid(n1) as usize;
            for b in 0..4 {
                let j = (j0 as i64 - 1 + b as i64).rem_euclid(n2) as usize;
                let c = self.coef[i * self.n2 + j];
                jet.value += c * bx[a] * by[b];
                jet.d1 += c * dbx[a] * by[b];
                jet.d2 += c * bx[a] * dby[b];
                jet.d11 += c * ddbx[a] * by[b];
                jet.d12 += c * dbx[a] * dby[b];
                jet.d22 += c * bx[a] * ddby[b];
            }
        }
        let s1 = self.n1 as f64;
        let s2 = self.n2 as f64;
        jet.d1 *= s1;
        jet.d2 *= s2;
        jet.d11 *= s1 * s1;
        jet.d12 *= s1 * s2;
        jet.d22 *= s2 * s2;
        jet
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn field(x: f64, y: f64) -> f64 {
        (2.0 * PI * x).sin() * (2.0 * PI * y).cos() + 0.3 * (2.0 * PI * (x + y)).cos()
    }

    fn sampled(n: usize) -> PeriodicSpline {
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                s[i * n + j] = field(i as f64 / n as f64, j as f64 / n as f64);
            }
        }
        PeriodicSpline::interpolate(n, n, &s)
    }

    #[test]
    fn interpolates_grid_values() {
        let n = 16;
        let sp = sampled(n);
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
                assert!((sp.jet(x, y).value - field(x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let sp = sampled(24);
        let (x, y, h) = (0.3137, 0.7211, 1e-5);
        let j = sp.jet(x, y);
        let fd1 = (sp.jet(x + h, y).value - sp.jet(x - h, y).value) / (2.0 * h);
        let fd22 = (sp.jet(x, y + h).d2 - sp.jet(x, y - h).d2) / (2.0 * h);
        let fd12 = (sp.jet(x, y + h).d1 - sp.jet(x, y - h).d1) / (2.0 * h);
        assert!((j.d1 - fd1).abs() < 1e-6);
        assert!((j.d22 - fd22).abs() < 1e-4 * (1.0 + fd22.abs()));
        assert!((j.d12 - fd12).abs() < 1e-4 * (1.0 + fd12.abs()));
    }

    #[test]
    fn periodic_in_both_directions() {
        let sp = sampled(12);
        let a = sp.jet(0.1, 0.4);
        let b = sp.jet(1.1, -0.6);
        assert!((a.value - b.value).abs() < 1e-12);
        assert!((a.d11 - b.d11).abs() < 1e-9);
    }
}
