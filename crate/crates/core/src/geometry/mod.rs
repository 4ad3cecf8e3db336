//! Charted Riemannian surfaces: flat tori, surfaces of revolution and conformal tori.
//!
//! Points live in a single chart. Flat and conformal tori use the universal cover of
//! the plane with a lattice of periods; surfaces of revolution use arclength profile
//! coordinates `(s, theta)` with metric `ds^2 + f(s)^2 dtheta^2` and period `(0, 2 pi)`.

pub mod geodesic;
pub mod ode;
pub mod spline;

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use geodesic::{solve_geodesic, GeodesicSegment};
pub use ode::IntegratorConfig;
use spline::PeriodicSpline;

pub type Point = Vector2<f64>;
pub type Vec2 = Vector2<f64>;

/// Five-point Gauss-Legendre nodes and weights on `[0, 1]`.
pub(crate) const GL5: [(f64, f64); 5] = [
    (0.046_910_077_030_668, 0.118_463_442_528_094_5),
    (0.230_765_344_947_158_5, 0.239_314_335_249_683_2),
    (0.5, 0.284_444_444_444_444_4),
    (0.769_234_655_052_841_5, 0.239_314_335_249_683_2),
    (0.953_089_922_969_332, 0.118_463_442_528_094_5),
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub components: Vec2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatTorus {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl FlatTorus {
    pub fn new(a: Vec2, b: Vec2) -> Result<Self> {
        let det = a.x * b.y - a.y * b.x;
        if !(det.abs() > 1e-12 * a.norm() * b.norm()) || !det.is_finite() {
            return Err(Error::Invalid("flat torus lattice vectors are dependent".into()));
        }
        Ok(FlatTorus { a: [a.x, a.y], b: [b.x, b.y] })
    }

    pub fn square(side: f64) -> Self {
        FlatTorus { a: [side, 0.0], b: [0.0, side] }
    }

    /// Square torus whose injectivity radius is `r`.
    pub fn with_injectivity_radius(r: f64) -> Self {
        Self::square(2.0 * r)
    }

    pub fn periods(&self) -> [Vec2; 2] {
        [Vec2::new(self.a[0], self.a[1]), Vec2::new(self.b[0], self.b[1])]
    }

    /// Lagrange-Gauss reduced basis; the first vector is a shortest nonzero lattice vector.
    pub fn reduced_basis(&self) -> [Vec2; 2] {
        reduce_lattice(self.periods())
    }

    pub fn shortest_vector(&self) -> Vec2 {
        self.reduced_basis()[0]
    }

    pub fn area(&self) -> f64 {
        (self.a[0] * self.b[1] - self.a[1] * self.b[0]).abs()
    }
}

pub(crate) fn reduce_lattice(basis: [Vec2; 2]) -> [Vec2; 2] {
    let (mut u, mut v) = (basis[0], basis[1]);
    if u.norm_squared() > v.norm_squared() {
        std::mem::swap(&mut u, &mut v);
    }
    loop {
        let mu = (u.dot(&v) / u.norm_squared()).round();
        v -= mu * u;
        if v.norm_squared() >= u.norm_squared() {
            return [u, v];
        }
        std::mem::swap(&mut u, &mut v);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Profile {
    /// Round sphere of the given radius.
    Sphere { radius: f64 },
    /// Two unit hemispheres joined by a flat cylinder of circumference 2 pi and the given length.
    CappedCylinder { length: f64 },
}

impl Profile {
    pub fn extent(&self) -> f64 {
        match *self {
            Profile::Sphere { radius } => PI * radius,
            Profile::CappedCylinder { length } => PI + length,
        }
    }

    /// Profile radius f(s) and its first two derivatives.
    pub fn jet(&self, s: f64) -> (f64, f64, f64) {
        match *self {
            Profile::Sphere { radius } => {
                let t = s / radius;
                (radius * t.sin(), t.cos(), -t.sin() / radius)
            }
            Profile::CappedCylinder { length } => {
                if s <= PI / 2.0 {
                    (s.sin(), s.cos(), -s.sin())
                } else if s <= PI / 2.0 + length {
                    (1.0, 0.0, 0.0)
                } else {
                    let u = s - PI / 2.0 - length;
                    (u.cos(), -u.sin(), -u.cos())
                }
            }
        }
    }

    /// Integral of f over `[0, s]`: the area form is `d(primitive) ^ dtheta`.
    pub fn primitive(&self, s: f64) -> f64 {
        match *self {
            Profile::Sphere { radius } => radius * radius * (1.0 - (s / radius).cos()),
            Profile::CappedCylinder { length } => {
                if s <= PI / 2.0 {
                    1.0 - s.cos()
                } else if s <= PI / 2.0 + length {
                    1.0 + (s - PI / 2.0)
                } else {
                    1.0 + length + (s - PI / 2.0 - length).sin()
                }
            }
        }
    }

    /// Integral of K f over `[0, s]`, equal to `f'(0) - f'(s)`.
    pub fn curvature_primitive(&self, s: f64) -> f64 {
        1.0 - self.jet(s).1
    }

    pub fn junctions(&self) -> Vec<f64> {
        match *self {
            Profile::Sphere { .. } => vec![],
            Profile::CappedCylinder { length } => vec![PI / 2.0, PI / 2.0 + length],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Revolution {
    #[serde(flatten)]
    pub profile: Profile,
    #[serde(default = "default_band")]
    pub junction_band: f64,
}

fn default_band() -> f64 {
    1e-3
}

/// Conformal torus with metric `exp(2u) (dx^2 + dy^2)`, u periodic and sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConformalSpec", into = "ConformalSpec")]
pub struct ConformalTorus {
    lattice: FlatTorus,
    samples: Vec<f64>,
    spline: PeriodicSpline,
    inverse: Matrix2<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConformalSpec {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub grid: [usize; 2],
    pub samples: Vec<f64>,
}

impl TryFrom<ConformalSpec> for ConformalTorus {
    type Error = Error;
    fn try_from(spec: ConformalSpec) -> Result<Self> {
        let lattice = FlatTorus::new(Vec2::from(spec.a), Vec2::from(spec.b))?;
        ConformalTorus::from_samples(lattice, spec.grid[0], spec.grid[1], spec.samples)
    }
}

impl From<ConformalTorus> for ConformalSpec {
    fn from(t: ConformalTorus) -> Self {
        let (n1, n2) = t.spline.dims();
        ConformalSpec { a: t.lattice.a, b: t.lattice.b, grid: [n1, n2], samples: t.samples }
    }
}

impl ConformalTorus {
    /// `samples[i * n2 + j]` is u at lattice coordinates `(i / n1, j / n2)`.
    pub fn from_samples(lattice: FlatTorus, n1: usize, n2: usize, samples: Vec<f64>) -> Result<Self> {
        if n1 < 4 || n2 < 4 || samples.len() != n1 * n2 {
            return Err(Error::Invalid(format!(
                "conformal field needs a grid of at least 4x4 with {} samples, got {}",
                n1 * n2,
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("conformal field has non-finite samples".into()));
        }
        let basis = Matrix2::from_columns(&lattice.periods());
        let inverse = basis.try_inverse().ok_or_else(|| Error::Invalid("singular lattice".into()))?;
        let spline = PeriodicSpline::interpolate(n1, n2, &samples);
        Ok(ConformalTorus { lattice, samples, spline, inverse })
    }

    /// Samples `field(xi, eta)` given in lattice coordinates on an `n x n` grid.
    pub fn from_fn(lattice: FlatTorus, n: usize, field: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut samples = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                samples.push(field(i as f64 / n as f64, j as f64 / n as f64));
            }
        }
        Self::from_samples(lattice, n, n, samples)
    }

    /// Single Fourier mode `amplitude * sin(2 pi kx xi) * cos(2 pi ky eta)`.
    pub fn trig(lattice: FlatTorus, n: usize, amplitude: f64, kx: f64, ky: f64) -> Result<Self> {
        Self::from_fn(lattice, n, |x, y| amplitude * (2.0 * PI * kx * x).sin() * (2.0 * PI * ky * y).cos())
    }

    pub fn lattice(&self) -> &FlatTorus {
        &self.lattice
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn grid(&self) -> (usize, usize) {
        self.spline.dims()
    }

    /// u, grad u and Hessian of u in chart coordinates.
    pub fn field(&self, p: &Point) -> (f64, Vec2, Matrix2<f64>) {
        let q = self.inverse * p;
        let j = self.spline.jet(q.x, q.y);
        let t = self.inverse.transpose();
        let grad = t * Vec2::new(j.d1, j.d2);
        let h = Matrix2::new(j.d11, j.d12, j.d12, j.d22);
        (j.value, grad, t * h * self.inverse)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SurfaceModel {
    FlatTorus(FlatTorus),
    Revolution(Revolution),
    ConformalTorus(ConformalTorus),
}

/// Gaussian curvature with a flag for one-sided values at non-smooth profile junctions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureSample {
    pub value: f64,
    pub non_smooth: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub certified: bool,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Estimate { value, certified: true }
    }
    fn approx(value: f64) -> Self {
        Estimate { value, certified: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceStats {
    pub min_k: Estimate,
    pub max_k: Estimate,
    pub inj: Estimate,
    pub area: Estimate,
}

impl SurfaceModel {
    pub fn sphere(radius: f64) -> Self {
        SurfaceModel::Revolution(Revolution { profile: Profile::Sphere { radius }, junction_band: 1e-3 })
    }

    pub fn capped_cylinder(length: f64) -> Self {
        SurfaceModel::Revolution(Revolution {
            profile: Profile::CappedCylinder { length },
            junction_band: 1e-3,
        })
    }

    pub fn flat_square(side: f64) -> Self {
        SurfaceModel::FlatTorus(FlatTorus::square(side))
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            SurfaceModel::FlatTorus(_) => "flat_torus",
            SurfaceModel::Revolution(_) => "revolution",
            SurfaceModel::ConformalTorus(_) => "conformal_torus",
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, SurfaceModel::FlatTorus(_))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SurfaceModel::FlatTorus(t) => FlatTorus::new(t.periods()[0], t.periods()[1]).map(|_| ()),
            SurfaceModel::Revolution(r) => {
                let ok = match r.profile {
                    Profile::Sphere { radius } => radius > 0.0 && radius.is_finite(),
                    Profile::CappedCylinder { length } => length >= 0.0 && length.is_finite(),
                };
                if ok && r.junction_band >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Invalid("invalid surface-of-revolution parameters".into()))
                }
            }
            SurfaceModel::ConformalTorus(_) => Ok(()),
        }
    }

    /// Generators of the deck group acting on the chart.
    pub fn periods(&self) -> Vec<Vec2> {
        match self {
            SurfaceModel::FlatTorus(t) => t.reduced_basis().to_vec(),
            SurfaceModel::ConformalTorus(t) => t.lattice.reduced_basis().to_vec(),
            SurfaceModel::Revolution(_) => vec![Vec2::new(0.0, 2.0 * PI)],
        }
    }

    /// All nonzero period translates with coefficients bounded by `range`.
    pub fn translates(&self, range: i32) -> Vec<Vec2> {
        let gens = self.periods();
        let mut out = Vec::new();
        if gens.len() == 1 {
            for i in -range..=range {
                if i != 0 {
                    out.push(gens[0] * i as f64);
                }
            }
        } else {
            for i in -range..=range {
                for j in -range..=range {
                    if i != 0 || j != 0 {
                        out.push(gens[0] * i as f64 + gens[1] * j as f64);
                    }
                }
            }
        }
        out
    }

    pub(crate) fn check_chart(&self, p: &Point) -> Result<()> {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::OutOfChart(p.x, p.y));
        }
        if let SurfaceModel::Revolution(r) = self {
            if p.x <= 0.0 || p.x >= r.profile.extent() {
                return Err(Error::OutOfChart(p.x, p.y));
            }
        }
        Ok(())
    }

    /// Canonical representative of `p` in the fundamental domain.
    pub fn wrap(&self, p: &Point) -> Result<Point> {
        self.check_chart(p)?;
        Ok(match self {
            SurfaceModel::FlatTorus(t) => wrap_lattice(t, p),
            SurfaceModel::ConformalTorus(t) => wrap_lattice(&t.lattice, p),
            SurfaceModel::Revolution(_) => Point::new(p.x, p.y.rem_euclid(2.0 * PI)),
        })
    }

    pub(crate) fn metric(&self, p: &Point) -> Matrix2<f64> {
        match self {
            SurfaceModel::FlatTorus(_) => Matrix2::identity(),
            SurfaceModel::Revolution(r) => {
                let f = r.profile.jet(p.x).0;
                Matrix2::new(1.0, 0.0, 0.0, f * f)
            }
            SurfaceModel::ConformalTorus(t) => {
                let (u, _, _) = t.field(p);
                Matrix2::identity() * (2.0 * u).exp()
            }
        }
    }

    /// Metric components at `p`.
    pub fn metric_at(&self, p: &Point) -> Result<Matrix2<f64>> {
        self.check_chart(p)?;
        Ok(self.metric(p))
    }

    /// Riemannian area density sqrt(det g).
    pub fn area_density(&self, p: &Point) -> f64 {
        match self {
            SurfaceModel::FlatTorus(_) => 1.0,
            SurfaceModel::Revolution(r) => r.profile.jet(p.x).0,
            SurfaceModel::ConformalTorus(t) => (2.0 * t.field(p).0).exp(),
        }
    }

    /// Christoffel contraction `Gamma^k_ij v^i w^j`.
    pub fn christoffel(&self, p: &Point, v: &Vec2, w: &Vec2) -> Vec2 {
        match self {
            SurfaceModel::FlatTorus(_) => Vec2::zeros(),
            SurfaceModel::Revolution(r) => {
                let (f, df, _) = r.profile.jet(p.x);
                Vec2::new(-f * df * v.y * w.y, df / f * (v.x * w.y + v.y * w.x))
            }
            SurfaceModel::ConformalTorus(t) => {
                let (_, g, _) = t.field(p);
                v * g.dot(w) + w * g.dot(v) - g * v.dot(w)
            }
        }
    }

    pub fn inner(&self, p: &Point, v: &Vec2, w: &Vec2) -> f64 {
        v.dot(&(self.metric(p) * w))
    }

    pub fn norm(&self, p: &Point, v: &Vec2) -> f64 {
        self.inner(p, v, v).max(0.0).sqrt()
    }

    /// Rotation by +90 degrees in the metric (same length, positively oriented).
    pub fn rotate_left(&self, p: &Point, v: &Vec2) -> Vec2 {
        let g = self.metric(p);
        let s = g.determinant().sqrt();
        Vec2::new(-g[(0, 1)] * v.x - g[(1, 1)] * v.y, g[(0, 0)] * v.x + g[(0, 1)] * v.y) / s
    }

    /// Oriented metric angle from `v` to `w` in `(-pi, pi]`.
    pub fn signed_angle(&self, p: &Point, v: &Vec2, w: &Vec2) -> f64 {
        let g = self.metric(p);
        let s = g.determinant().sqrt();
        let cross = s * (v.x * w.y - v.y * w.x);
        cross.atan2(v.dot(&(g * w)))
    }

    /// Midpoint-metric chord length of the chart segment `a -> b`.
    pub fn chord_length(&self, a: &Point, b: &Point) -> f64 {
        let mid = (a + b) * 0.5;
        self.norm(&mid, &(b - a))
    }

    pub fn gauss_curvature_at(&self, p: &Point) -> Result<CurvatureSample> {
        self.check_chart(p)?;
        Ok(match self {
            SurfaceModel::FlatTorus(_) => CurvatureSample { value: 0.0, non_smooth: false },
            SurfaceModel::Revolution(r) => {
                let (f, _, ddf) = r.profile.jet(p.x);
                let non_smooth = r.profile.junctions().iter().any(|j| (p.x - j).abs() <= r.junction_band);
                CurvatureSample { value: -ddf / f, non_smooth }
            }
            SurfaceModel::ConformalTorus(t) => {
                let (u, _, h) = t.field(p);
                CurvatureSample { value: -(h[(0, 0)] + h[(1, 1)]) * (-2.0 * u).exp(), non_smooth: false }
            }
        })
    }

    /// Curvature value without chart checks; callers guarantee `p` is in the chart.
    pub(crate) fn curvature(&self, p: &Point) -> f64 {
        match self {
            SurfaceModel::FlatTorus(_) => 0.0,
            SurfaceModel::Revolution(r) => {
                let (f, _, ddf) = r.profile.jet(p.x);
                -ddf / f
            }
            SurfaceModel::ConformalTorus(t) => {
                let (u, _, h) = t.field(p);
                -(h[(0, 0)] + h[(1, 1)]) * (-2.0 * u).exp()
            }
        }
    }

    /// Exponential map with the result wrapped into the fundamental domain.
    pub fn exp_map(&self, v: &TangentVector, cfg: &IntegratorConfig) -> Result<Point> {
        let p = self.exp_unwrapped(v, cfg)?;
        self.wrap(&p)
    }

    /// Exponential map in the universal cover of the chart.
    pub fn exp_unwrapped(&self, v: &TangentVector, cfg: &IntegratorConfig) -> Result<Point> {
        self.check_chart(&v.base)?;
        if self.is_flat() {
            return Ok(v.base + v.components);
        }
        let (p, _) = ode::integrate_adaptive(self, v.base, v.components, 1.0, cfg)?;
        self.check_chart(&p)?;
        Ok(p)
    }

    /// Total area of the surface.
    pub fn total_area(&self) -> f64 {
        match self {
            SurfaceModel::FlatTorus(t) => t.area(),
            SurfaceModel::Revolution(r) => 2.0 * PI * r.profile.primitive(r.profile.extent()),
            SurfaceModel::ConformalTorus(t) => {
                let n = 128;
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let q = Vec2::new(i as f64 / n as f64, j as f64 / n as f64);
                        acc += (2.0 * t.spline.jet(q.x, q.y).value).exp();
                    }
                }
                acc * t.lattice.area() / (n * n) as f64
            }
        }
    }

    /// Signed area and curvature integral of the disk bounded by a closed chart polygon.
    ///
    /// For contractible loops (zero `shift`) this is the bounded side in the cover with
    /// counterclockwise orientation counted positive. On a surface of revolution a loop
    /// winding once around the axis (`shift = (0, +-2 pi)`) bounds the side containing the
    /// pole at `s = 0`.
    pub fn loop_integrals(&self, vertices: &[Point], shift: &Vec2) -> Result<(f64, f64)> {
        let n = vertices.len();
        let seg = |i: usize| -> (Point, Point) {
            let a = vertices[i];
            let b = if i + 1 < n { vertices[i + 1] } else { vertices[0] + shift };
            (a, b)
        };
        match self {
            SurfaceModel::Revolution(r) => {
                if shift.x != 0.0 || (shift.y != 0.0 && (shift.y.abs() - 2.0 * PI).abs() > 1e-9) {
                    return Err(Error::Invalid("loop winds more than once around the axis".into()));
                }
                let mut area = 0.0;
                let mut curv = 0.0;
                for i in 0..n {
                    let (a, b) = seg(i);
                    let d = b - a;
                    for (t, w) in GL5 {
                        let s = a.x + t * d.x;
                        area += w * r.profile.primitive(s) * d.y;
                        curv += w * r.profile.curvature_primitive(s) * d.y;
                    }
                }
                Ok((area, curv))
            }
            SurfaceModel::FlatTorus(_) => {
                if shift.norm() > 0.0 {
                    return Err(Error::Invalid("winding loop on a torus bounds no disk".into()));
                }
                let mut area = 0.0;
                for i in 0..n {
                    let (a, b) = seg(i);
                    area += a.x * b.y - a.y * b.x;
                }
                Ok((0.5 * area, 0.0))
            }
            SurfaceModel::ConformalTorus(t) => {
                if shift.norm() > 0.0 {
                    return Err(Error::Invalid("winding loop on a torus bounds no disk".into()));
                }
                let x_ref = vertices.iter().map(|v| v.x).fold(f64::INFINITY, f64::min);
                let mut area = 0.0;
                let mut curv = 0.0;
                for i in 0..n {
                    let (a, b) = seg(i);
                    let d = b - a;
                    for (s, w) in GL5 {
                        let p = a + d * s;
                        let (_, g, _) = t.field(&p);
                        curv -= w * (g.x * d.y - g.y * d.x);
                        if d.y != 0.0 {
                            area += w * d.y * horizontal_mass(t, x_ref, &p);
                        }
                    }
                }
                Ok((area, curv))
            }
        }
    }

    /// Curvature bounds, injectivity radius and area.
    pub fn surface_stats(&self) -> SurfaceStats {
        match self {
            SurfaceModel::FlatTorus(t) => SurfaceStats {
                min_k: Estimate::exact(0.0),
                max_k: Estimate::exact(0.0),
                inj: Estimate::exact(t.shortest_vector().norm() / 2.0),
                area: Estimate::exact(t.area()),
            },
            SurfaceModel::Revolution(r) => match r.profile {
                Profile::Sphere { radius } => SurfaceStats {
                    min_k: Estimate::exact(1.0 / (radius * radius)),
                    max_k: Estimate::exact(1.0 / (radius * radius)),
                    inj: Estimate::exact(PI * radius),
                    area: Estimate::exact(4.0 * PI * radius * radius),
                },
                Profile::CappedCylinder { length } => SurfaceStats {
                    min_k: Estimate::exact(0.0),
                    max_k: Estimate::exact(1.0),
                    inj: Estimate::exact(PI),
                    area: Estimate::exact(4.0 * PI + 2.0 * PI * length),
                },
            },
            SurfaceModel::ConformalTorus(t) => conformal_stats(self, t),
        }
    }

    /// Radius below which two-point geodesic problems have unique short solutions.
    pub fn local_uniqueness_radius(&self) -> f64 {
        self.surface_stats().inj.value
    }
}

fn wrap_lattice(t: &FlatTorus, p: &Point) -> Point {
    let basis = Matrix2::from_columns(&t.periods());
    let inv = basis.try_inverse().expect("lattice validated at construction");
    let q = inv * p;
    basis * Vec2::new(q.x - q.x.floor(), q.y - q.y.floor())
}

/// Integral of exp(2u) along the horizontal segment from `x_ref` to `p`.
fn horizontal_mass(t: &ConformalTorus, x_ref: f64, p: &Point) -> f64 {
    let len = p.x - x_ref;
    if len == 0.0 {
        return 0.0;
    }
    let panels = ((len.abs() / 0.02).ceil() as usize).max(1);
    let h = len / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let x0 = x_ref + h * k as f64;
        for (s, w) in GL5 {
            let q = Point::new(x0 + s * h, p.y);
            acc += w * (2.0 * t.field(&q).0).exp();
        }
    }
    acc * h
}

fn conformal_stats(surface: &SurfaceModel, t: &ConformalTorus) -> SurfaceStats {
    let basis = Matrix2::from_columns(&t.lattice.periods());
    let n = 48;
    let mut kmin = f64::INFINITY;
    let mut kmax = f64::NEG_INFINITY;
    let mut argmin = Vec2::zeros();
    let mut argmax = Vec2::zeros();
    let mut grad_bound: f64 = 0.0;
    let sample = |q: Vec2| surface.curvature(&(basis * q));
    let cell = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            let q = Vec2::new(i as f64 * cell, j as f64 * cell);
            let k = sample(q);
            let kx = sample(q + Vec2::new(cell, 0.0));
            let ky = sample(q + Vec2::new(0.0, cell));
            grad_bound = grad_bound.max((kx - k).abs()).max((ky - k).abs());
            if k < kmin {
                kmin = k;
                argmin = q;
            }
            if k > kmax {
                kmax = k;
                argmax = q;
            }
        }
    }
    let refine = |center: Vec2, best: f64, lower: bool| {
        let m = 16;
        let mut out = best;
        for i in 0..=m {
            for j in 0..=m {
                let q = center + Vec2::new((i as f64 / m as f64 - 0.5) * 2.0 * cell, (j as f64 / m as f64 - 0.5) * 2.0 * cell);
                let k = sample(q);
                out = if lower { out.min(k) } else { out.max(k) };
            }
        }
        out
    };
    let margin = grad_bound / 16.0;
    let kmin = refine(argmin, kmin, true) - margin;
    let kmax = refine(argmax, kmax, false) + margin;

    let reduced = t.lattice.reduced_basis();
    let classes = [reduced[0], reduced[1], reduced[0] + reduced[1], reduced[0] - reduced[1]];
    let mut shortest = f64::INFINITY;
    for i in 0..3 {
        for j in 0..3 {
            let p = basis * Vec2::new(i as f64 / 3.0, j as f64 / 3.0);
            for w in classes {
                if let Ok(g) = solve_geodesic(surface, &p, &(p + w), 1e-10) {
                    shortest = shortest.min(g.length);
                }
            }
        }
    }
    let mut inj = shortest / 2.0;
    if kmax > 0.0 {
        inj = inj.min(PI / kmax.sqrt());
    }
    SurfaceStats {
        min_k: Estimate::approx(kmin),
        max_k: Estimate::approx(kmax),
        inj: Estimate::approx(inj),
        area: Estimate::approx(surface.total_area()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bumpy() -> SurfaceModel {
        SurfaceModel::ConformalTorus(ConformalTorus::trig(FlatTorus::square(1.0), 32, 0.08, 1.0, 1.0).unwrap())
    }

    #[test]
    fn flat_metric_is_identity() {
        let s = SurfaceModel::flat_square(1.0);
        assert_eq!(s.metric_at(&Point::new(0.3, 0.8)).unwrap(), Matrix2::identity());
    }

    #[test]
    fn sphere_equator_metric_is_identity() {
        let s = SurfaceModel::sphere(1.0);
        let g = s.metric_at(&Point::new(PI / 2.0, 1.0)).unwrap();
        assert!((g - Matrix2::identity()).norm() < 1e-15);
    }

    #[test]
    fn conformal_metric_matches_field() {
        let s = bumpy();
        let p = Point::new(0.25, 0.0);
        let expected = (2.0 * 0.08f64).exp();
        let g = s.metric_at(&p).unwrap();
        assert!((g[(0, 0)] - expected).abs() < 1e-6);
        assert!((g[(1, 1)] - expected).abs() < 1e-6);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn poles_are_out_of_chart() {
        let s = SurfaceModel::sphere(1.0);
        assert!(matches!(s.metric_at(&Point::new(0.0, 0.0)), Err(Error::OutOfChart(..))));
    }

    #[test]
    fn revolution_curvature_matches_profile() {
        let s = SurfaceModel::sphere(2.0);
        let k = s.gauss_curvature_at(&Point::new(1.3, 0.2)).unwrap();
        assert!((k.value - 0.25).abs() < 1e-12);
        let cyl = SurfaceModel::capped_cylinder(3.0);
        assert_eq!(cyl.gauss_curvature_at(&Point::new(3.0, 0.0)).unwrap().value, 0.0);
        assert!((cyl.gauss_curvature_at(&Point::new(0.7, 0.0)).unwrap().value - 1.0).abs() < 1e-12);
        assert!(cyl.gauss_curvature_at(&Point::new(PI / 2.0 + 1e-4, 0.0)).unwrap().non_smooth);
    }

    #[test]
    fn conformal_curvature_matches_finite_difference_laplacian() {
        let s = bumpy();
        let SurfaceModel::ConformalTorus(t) = &s else { unreachable!() };
        let p = Point::new(0.137, 0.611);
        let h = 1e-4;
        let u = |q: Point| t.field(&q).0;
        let lap = (u(p + Vec2::new(h, 0.0)) + u(p - Vec2::new(h, 0.0)) + u(p + Vec2::new(0.0, h))
            + u(p - Vec2::new(0.0, h))
            - 4.0 * u(p))
            / (h * h);
        let expected = -lap * (-2.0 * u(p)).exp();
        let k = s.gauss_curvature_at(&p).unwrap().value;
        assert!((k - expected).abs() < 1e-6 * expected.abs().max(1.0));
    }

    #[test]
    fn flat_exp_map_wraps() {
        let s = SurfaceModel::flat_square(1.0);
        let v = TangentVector { base: Point::new(0.9, 0.5), components: Vec2::new(0.3, -0.7) };
        let q = s.exp_map(&v, &IntegratorConfig::default()).unwrap();
        assert!((q - Point::new(0.2, 0.8)).norm() < 1e-12);
    }

    #[test]
    fn sphere_exp_reaches_antipode() {
        let s = SurfaceModel::sphere(1.0);
        let v = TangentVector { base: Point::new(PI / 2.0, 0.0), components: Vec2::new(0.0, PI) };
        let q = s.exp_map(&v, &IntegratorConfig::default()).unwrap();
        assert!((q - Point::new(PI / 2.0, PI)).norm() < 1e-6);
    }

    #[test]
    fn exp_map_distance_matches_speed() {
        let s = bumpy();
        let base = Point::new(0.3, 0.4);
        let v = Vec2::new(0.12, 0.05);
        for t in [0.5, 1.0, 2.0] {
            let q = s.exp_unwrapped(&TangentVector { base, components: v * t }, &IntegratorConfig::default()).unwrap();
            let g = solve_geodesic(&s, &base, &q, 1e-12).unwrap();
            assert!((g.length - t * s.norm(&base, &v)).abs() < 1e-5);
        }
    }

    #[test]
    fn flat_stats_use_shortest_lattice_vector() {
        let t = FlatTorus::new(Vec2::new(2.0, 0.0), Vec2::new(7.0, 1.5)).unwrap();
        let stats = SurfaceModel::FlatTorus(t).surface_stats();
        let brute = (-5..=5)
            .flat_map(|i| (-5..=5).map(move |j| (i, j)))
            .filter(|&(i, j)| (i, j) != (0, 0))
            .map(|(i, j)| (Vec2::new(2.0, 0.0) * i as f64 + Vec2::new(7.0, 1.5) * j as f64).norm())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(stats.inj.value, brute / 2.0);
        assert!(stats.inj.certified);
    }

    #[test]
    fn capped_cylinder_stats() {
        let s = SurfaceModel::capped_cylinder(5.0).surface_stats();
        assert_eq!(s.inj.value, PI);
        assert_eq!(s.min_k.value, 0.0);
        assert_eq!(s.max_k.value, 1.0);
        assert!((s.area.value - (4.0 * PI + 10.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn sphere_stats() {
        let s = SurfaceModel::sphere(1.0).surface_stats();
        assert_eq!(s.inj.value, PI);
        assert!((s.area.value - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn conformal_stats_bracket_sampled_curvature() {
        let s = bumpy();
        let stats = s.surface_stats();
        assert!(!stats.inj.certified);
        assert!(stats.min_k.value < 0.0 && stats.max_k.value > 0.0);
        for i in 0..20 {
            let p = Point::new(i as f64 * 0.0513, i as f64 * 0.0377);
            let k = s.gauss_curvature_at(&p).unwrap().value;
            assert!(k >= stats.min_k.value - 1e-9 && k <= stats.max_k.value + 1e-9);
        }
        assert!((stats.area.value - s.total_area()).abs() < 1e-12);
        assert!(stats.inj.value > 0.3 && stats.inj.value < 0.7);
    }

    #[test]
    fn disk_integrals_on_sphere_cap() {
        let s = SurfaceModel::sphere(1.0);
        let rho = 0.9;
        let n = 64;
        let v: Vec<Point> = (0..n).map(|i| Point::new(rho, 2.0 * PI * i as f64 / n as f64)).collect();
        let (area, curv) = s.loop_integrals(&v, &Vec2::new(0.0, 2.0 * PI)).unwrap();
        assert!((area - 2.0 * PI * (1.0 - rho.cos())).abs() < 1e-12);
        assert!((curv - area).abs() < 1e-12);
    }

    #[test]
    fn conformal_disk_area_converges() {
        let s = bumpy();
        let poly = |n: usize| -> Vec<Point> {
            (0..n).map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                Point::new(0.5 + 0.2 * t.cos(), 0.5 + 0.2 * t.sin())
            }).collect()
        };
        let (a1, _) = s.loop_integrals(&poly(200), &Vec2::zeros()).unwrap();
        let (a2, _) = s.loop_integrals(&poly(400), &Vec2::zeros()).unwrap();
        assert!((a1 - a2).abs() < 1e-4);
        assert!((a2 - PI * 0.04).abs() < 0.05);
    }

    proptest! {
        #[test]
        fn metric_positive_definite(x in 0.0f64..1.0, y in 0.0f64..1.0, s in 0.01f64..3.1) {
            for surf in [bumpy(), SurfaceModel::flat_square(1.0)] {
                let g = surf.metric_at(&Point::new(x, y)).unwrap();
                prop_assert!(g[(0, 0)] > 0.0 && g.determinant() > 0.0);
            }
            let g = SurfaceModel::sphere(1.0).metric_at(&Point::new(s, x)).unwrap();
            prop_assert!(g.determinant() > 0.0);
        }

        #[test]
        fn exp_semigroup(t1 in 0.1f64..0.6, t2 in 0.1f64..0.6, ang in 0.0f64..std::f64::consts::TAU) {
            let s = bumpy();
            let cfg = IntegratorConfig::default();
            let base = Point::new(0.2, 0.7);
            let v = Vec2::new(ang.cos(), ang.sin()) * 0.4;
            let direct = s.exp_unwrapped(&TangentVector { base, components: v * (t1 + t2) }, &cfg).unwrap();
            let (mid, vel) = ode::integrate_adaptive(&s, base, v * t1, 1.0, &cfg).unwrap();
            let cont = s.exp_unwrapped(&TangentVector { base: mid, components: vel * (t2 / t1) }, &cfg).unwrap();
            prop_assert!((direct - cont).norm() < 1e-6);
        }
    }
}
