//! Horizontal gradients, characteristic points and horizontal mean curvature
//! of implicit surfaces `{F = 0}`.
//!
//! The left-invariant horizontal frame is `X = ∂x + 2y∂t`, `Y = ∂y − 2x∂t`.
//! Second horizontal derivatives compose the fields (`XYF = X(YF)`), which
//! do not commute: `XY − YX = −4T`.

use crate::bisector::{Aabb, CubicField};
use crate::error::{Error, Result};
use crate::heis::HeisPoint;
use crate::io::fmt_f64;
use crate::poly::{cubic_roots_in, Jet, Monomial, Polynomial};
use rayon::prelude::*;
use std::io::Write;

/// A `C²` function on the Heisenberg group with access to its partials.
pub trait ScalarField: Sync {
    fn value(&self, p: &HeisPoint) -> f64;

    /// Value, Euclidean gradient and Hessian in `(x, y, t)`.
    fn jet(&self, p: &HeisPoint) -> Jet;
}

impl ScalarField for Polynomial {
    fn value(&self, p: &HeisPoint) -> f64 {
        self.eval(p.to_array())
    }

    fn jet(&self, p: &HeisPoint) -> Jet {
        Polynomial::jet(self, p.to_array())
    }
}

impl ScalarField for CubicField {
    fn value(&self, p: &HeisPoint) -> f64 {
        self.residual(p)
    }

    fn jet(&self, p: &HeisPoint) -> Jet {
        self.polynomial().jet(p.to_array())
    }
}

/// Partials by central differences: step `h1` for the gradient, `h2` for the
/// Hessian.
pub struct FiniteDifference<F> {
    f: F,
    pub h1: f64,
    pub h2: f64,
}

impl<F: Fn(&HeisPoint) -> f64 + Sync> FiniteDifference<F> {
    pub fn new(f: F) -> Self {
        Self { f, h1: 1e-5, h2: 1e-4 }
    }

    pub fn with_steps(f: F, h1: f64, h2: f64) -> Self {
        Self { f, h1, h2 }
    }
}

fn shifted(p: &HeisPoint, moves: &[(usize, f64)]) -> HeisPoint {
    let mut a = p.to_array();
    for &(axis, d) in moves {
        a[axis] += d;
    }
    HeisPoint::from(a)
}

impl<F: Fn(&HeisPoint) -> f64 + Sync> ScalarField for FiniteDifference<F> {
    fn value(&self, p: &HeisPoint) -> f64 {
        (self.f)(p)
    }

    fn jet(&self, p: &HeisPoint) -> Jet {
        let f = |m: &[(usize, f64)]| (self.f)(&shifted(p, m));
        let (h, k) = (self.h1, self.h2);
        let mut jet = Jet { value: f(&[]), ..Default::default() };
        for i in 0..3 {
            jet.grad[i] = (f(&[(i, h)]) - f(&[(i, -h)])) / (2.0 * h);
            jet.hess[i][i] = (f(&[(i, k)]) - 2.0 * jet.value + f(&[(i, -k)])) / (k * k);
            for j in 0..i {
                let d = (f(&[(i, k), (j, k)]) - f(&[(i, k), (j, -k)]) - f(&[(i, -k), (j, k)])
                    + f(&[(i, -k), (j, -k)]))
                    / (4.0 * k * k);
                jet.hess[i][j] = d;
                jet.hess[j][i] = d;
            }
        }
        jet
    }
}

/// `F = t`, the plane through the origin.
pub fn plane_field() -> CubicField {
    CubicField::from_polynomial(Polynomial::coordinate(2)).expect("nonzero")
}

/// `F = x(x² + y² + 1) − yt`.
pub fn s1_field() -> CubicField {
    let terms = [
        (Monomial([3, 0, 0]), 1.0),
        (Monomial([1, 2, 0]), 1.0),
        (Monomial([1, 0, 0]), 1.0),
        (Monomial([0, 1, 1]), -1.0),
    ];
    CubicField::from_polynomial(Polynomial::from_terms(terms)).expect("nonzero")
}

/// First and second horizontal derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizontalJet {
    pub xf: f64,
    pub yf: f64,
    pub xxf: f64,
    pub yyf: f64,
    pub xyf: f64,
    pub yxf: f64,
}

impl HorizontalJet {
    pub fn from_jet(jet: &Jet, p: &HeisPoint) -> Self {
        let (x, y) = (p.x, p.y);
        let [fx, fy, ft] = jet.grad;
        let h = &jet.hess;
        let (fxx, fyy, ftt, fxy, fxt, fyt) = (h[0][0], h[1][1], h[2][2], h[0][1], h[0][2], h[1][2]);
        Self {
            xf: fx + 2.0 * y * ft,
            yf: fy - 2.0 * x * ft,
            xxf: fxx + 4.0 * y * fxt + 4.0 * y * y * ftt,
            yyf: fyy - 4.0 * x * fyt + 4.0 * x * x * ftt,
            xyf: fxy - 2.0 * ft - 2.0 * x * fxt + 2.0 * y * fyt - 4.0 * x * y * ftt,
            yxf: fxy + 2.0 * ft + 2.0 * y * fyt - 2.0 * x * fxt - 4.0 * x * y * ftt,
        }
    }

    pub fn gradient_norm(&self) -> f64 {
        self.xf.hypot(self.yf)
    }
}

pub fn horizontal_jet<F: ScalarField + ?Sized>(field: &F, p: &HeisPoint) -> HorizontalJet {
    HorizontalJet::from_jet(&field.jet(p), p)
}

/// `(XF, YF)` at `p`.
pub fn horizontal_gradient<F: ScalarField + ?Sized>(field: &F, p: &HeisPoint) -> (f64, f64) {
    let h = horizontal_jet(field, p);
    (h.xf, h.yf)
}

/// `1e-8 · (1 + |∇F(p)|)`, the default characteristic tolerance.
pub fn characteristic_tolerance<F: ScalarField + ?Sized>(field: &F, p: &HeisPoint) -> f64 {
    let g = field.jet(p).grad;
    1e-8 * (1.0 + (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt())
}

pub fn is_characteristic<F: ScalarField + ?Sized>(field: &F, p: &HeisPoint, tol: f64) -> bool {
    horizontal_jet(field, p).gradient_norm() <= tol
}

fn non_characteristic<F: ScalarField + ?Sized>(field: &F, p: &HeisPoint) -> Result<HorizontalJet> {
    let jet = field.jet(p);
    let h = HorizontalJet::from_jet(&jet, p);
    let g = jet.grad;
    let tol = 1e-8 * (1.0 + (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt());
    let norm = h.gradient_norm();
    if norm <= tol {
        return Err(Error::CharacteristicPoint(norm));
    }
    Ok(h)
}

/// Horizontal mean curvature from second horizontal derivatives:
/// `2H = [(YF)² XXF + (XF)² YYF − XF·YF (XYF + YXF)] / |∇ₕF|³`.
pub fn mean_curvature<F: ScalarField + ?Sized>(field: &F, p: &HeisPoint) -> Result<f64> {
    let h = non_characteristic(field, p)?;
    let num = h.yf * h.yf * h.xxf + h.xf * h.xf * h.yyf - h.xf * h.yf * (h.xyf + h.yxf);
    Ok(0.5 * num / h.gradient_norm().powi(3))
}

/// Step used to differentiate the unit horizontal normal along `X` and `Y`.
pub const NORMAL_STEP: f64 = 1e-5;

/// Horizontal mean curvature as the horizontal divergence of the unit
/// horizontal normal, `2H = X(n₁) + Y(n₂)`, differentiated numerically with
/// the fourth-order five-point stencil.
pub fn definitional_curvature<F: ScalarField + ?Sized>(field: &F, p: &HeisPoint) -> Result<f64> {
    definitional_curvature_with_step(field, p, NORMAL_STEP)
}

pub fn definitional_curvature_with_step<F: ScalarField + ?Sized>(field: &F, p: &HeisPoint, h: f64) -> Result<f64> {
    non_characteristic(field, p)?;
    let normal = |q: &HeisPoint| {
        let (a, b) = horizontal_gradient(field, q);
        let n = a.hypot(b);
        (a / n, b / n)
    };
    let along = |v: [f64; 3], s: f64| HeisPoint::new(p.x + s * v[0], p.y + s * v[1], p.t + s * v[2]);
    let derivative = |v: [f64; 3], component: fn((f64, f64)) -> f64| {
        let g = |s: f64| component(normal(&along(v, s)));
        (8.0 * (g(h) - g(-h)) - (g(2.0 * h) - g(-2.0 * h))) / (12.0 * h)
    };
    let xn1 = derivative([1.0, 0.0, 2.0 * p.y], |n| n.0);
    let yn2 = derivative([0.0, 1.0, -2.0 * p.x], |n| n.1);
    Ok(0.5 * (xn1 + yn2))
}

/// Closed-form curvature of `x(x² + y² + 1) = yt` over the point with
/// horizontal coordinates `(x, y)`. Returns `0` on `y = 0`, where the surface
/// reduces to the vertical axis.
pub fn s1_curvature(x: f64, y: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(0.0);
    }
    let a = 3.0 * x * x - y * y + 1.0;
    let b = 3.0 * y * y - x * x - 1.0;
    let denom = (y * y * a * a + x * x * b * b).sqrt();
    if denom == 0.0 {
        return Err(Error::CharacteristicPoint(0.0));
    }
    Ok(3.0 * x * y / denom)
}

/// Curvature of `{x(x² + y² + 1) − yt = 0}` oriented by the gradient of
/// that cubic: `3x|y| / [y²(3x²−y²+1)² + x²(3y²−x²−1)²]^½`. Agrees with
/// [`s1_curvature`] for `y > 0` and has the opposite sign for `y < 0`.
pub fn s1_curvature_oriented(x: f64, y: f64) -> Result<f64> {
    s1_curvature(x, y.abs())
}

/// Height of the surface `x(x² + y² + 1) = yt` over `(x, y)`, `y ≠ 0`.
pub fn s1_height(x: f64, y: f64) -> f64 {
    x / y * (x * x + y * y + 1.0)
}

/// Characteristic points of `x(x² + y² + 1) = yt`.
///
/// `XF = 3x² − y² + 1` and `YF = 4xy − t` vanish together with `F` only if
/// `t = 4xy` and `x(x² − 3y² + 1) = 0`. With `x ≠ 0` the two quadrics force
/// `y² = 1/4` and `x² = −1/4`, which has no real solution; with `x = 0`,
/// `y² = 1`.
pub fn characteristic_locus_s1() -> Vec<HeisPoint> {
    let mut out = Vec::new();
    // branch x = 0: 3·0 − y² + 1 = 0
    for y in [1.0f64, -1.0] {
        out.push(HeisPoint::new(0.0, y, 4.0 * 0.0 * y));
    }
    // branch x² = 3y² − 1 substituted into 3x² − y² + 1 = 0
    // 9y² − 3 − y² + 1 = 0
    let y2: f64 = 2.0 / 8.0;
    let x2 = 3.0 * y2 - 1.0;
    if x2 > 0.0 {
        let (x, y) = (x2.sqrt(), y2.sqrt());
        for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            out.push(HeisPoint::new(sx * x, sy * y, 4.0 * sx * x * sy * y));
        }
    }
    out
}

/// Grid points `min + (max − min)·k/(n − 1)`, `k = 0..n`.
pub fn grid_axis(min: f64, max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![min];
    }
    (0..n).map(|k| min + (max - min) * k as f64 / (n - 1) as f64).collect()
}

/// Grid points of `region` (`n` per axis) lying on `{F = 0}` within
/// `surface_tol` and characteristic at the default tolerance, in x-fastest
/// order.
pub fn characteristic_scan<F: ScalarField + ?Sized>(field: &F, region: &Aabb, n: usize, surface_tol: f64) -> Vec<HeisPoint> {
    let axes: Vec<Vec<f64>> = (0..3).map(|i| grid_axis(region.min[i], region.max[i], n)).collect();
    let slabs: Vec<Vec<HeisPoint>> = axes[2]
        .par_iter()
        .map(|&t| {
            let mut found = Vec::new();
            for &y in &axes[1] {
                for &x in &axes[0] {
                    let p = HeisPoint::new(x, y, t);
                    if field.value(&p).abs() <= surface_tol
                        && is_characteristic(field, &p, characteristic_tolerance(field, &p))
                    {
                        found.push(p);
                    }
                }
            }
            found
        })
        .collect();
    slabs.into_iter().flatten().collect()
}

/// Rectangular `(x, y)` grid with `n × n` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub n: usize,
}

impl Grid2 {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64, n: usize) -> Result<Self> {
        if n < 2 || !(xmin < xmax) || !(ymin < ymax) {
            return Err(Error::InvalidArgument(format!("bad grid {xmin},{xmax},{ymin},{ymax},{n}")));
        }
        Ok(Self { xmin, xmax, ymin, ymax, n })
    }

    /// Rows of constant `y`, each running over `x`.
    pub fn rows(&self) -> Vec<Vec<(f64, f64)>> {
        let xs = grid_axis(self.xmin, self.xmax, self.n);
        grid_axis(self.ymin, self.ymax, self.n)
            .into_iter()
            .map(|y| xs.iter().map(|&x| (x, y)).collect())
            .collect()
    }
}

/// `H` as a function of `(x, y)`, written `x,y,H`. Undefined values are `nan`.
pub fn write_grid_xy<W: Write, H: Fn(f64, f64) -> Result<f64> + Sync>(mut out: W, grid: &Grid2, h: H) -> Result<()> {
    let rows: Vec<String> = grid
        .rows()
        .par_iter()
        .map(|row| {
            let mut s = String::new();
            for &(x, y) in row {
                let v = h(x, y).unwrap_or(f64::NAN);
                s.push_str(&format!("{},{},{}\n", fmt_f64(x), fmt_f64(y), fmt_f64(v)));
            }
            s
        })
        .collect();
    writeln!(out, "x,y,H")?;
    for r in rows {
        out.write_all(r.as_bytes())?;
    }
    Ok(())
}

/// Coefficients of `t ↦ F(x, y, t)`, lowest degree first.
pub fn vertical_restriction(poly: &Polynomial, x: f64, y: f64) -> [f64; 4] {
    let mut c = [0.0; 4];
    for (m, v) in poly.terms() {
        let [a, b, k] = m.0;
        c[k as usize] += v * x.powi(a as i32) * y.powi(b as i32);
    }
    c
}

/// Every surface point over the grid with `|t| <= t_max`, written
/// `x,y,t,H`. Vertical lines contained in the surface are skipped.
pub fn write_grid_on_surface<W: Write>(mut out: W, field: &CubicField, grid: &Grid2, t_max: f64) -> Result<()> {
    let rows: Vec<String> = grid
        .rows()
        .par_iter()
        .map(|row| {
            let mut s = String::new();
            for &(x, y) in row {
                for t in cubic_roots_in(vertical_restriction(field.polynomial(), x, y), -t_max, t_max) {
                    let p = HeisPoint::new(x, y, t);
                    let h = mean_curvature(field, &p).unwrap_or(f64::NAN);
                    s.push_str(&format!("{},{},{},{}\n", fmt_f64(x), fmt_f64(y), fmt_f64(t), fmt_f64(h)));
                }
            }
            s
        })
        .collect();
    writeln!(out, "x,y,t,H")?;
    for r in rows {
        out.write_all(r.as_bytes())?;
    }
    Ok(())
}
