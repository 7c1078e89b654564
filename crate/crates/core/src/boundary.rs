//! Linear algebra of `ℂ^{2,1}` and the `PU(2,1)` action on the boundary
//! `𝔥 ∪ {∞}` of complex hyperbolic space in the Siegel model.
//!
//! The Hermitian form is `⟨z, w⟩ = z₁w̄₃ + z₂w̄₂ + z₃w̄₁`. A Heisenberg point
//! `(z, t)` lifts to the null vector `((−|z|² + it)/2, z, 1)` and `∞` lifts to
//! `(1, 0, 0)`; with this choice Heisenberg translations, rotations and
//! dilations are realized by matrices preserving the form.

use crate::error::{Error, Result};
use crate::heis::HeisPoint;
use crate::similarity::Similarity;
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::ser::{Serialize, SerializeSeq, Serializer};
use serde::Deserialize;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C21Vector(pub Vector3<Complex64>);

impl C21Vector {
    pub fn new(z1: Complex64, z2: Complex64, z3: Complex64) -> Self {
        Self(Vector3::new(z1, z2, z3))
    }

    pub fn real(a: f64, b: f64, c: f64) -> Self {
        Self::new(a.into(), b.into(), c.into())
    }

    /// `‖z‖²` for the standard (positive definite) inner product.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self(self.0 * k)
    }
}

pub fn hermitian(z: &C21Vector, w: &C21Vector) -> Complex64 {
    let (z, w) = (&z.0, &w.0);
    // grouped so that swapping the arguments conjugates the result exactly
    (z[0] * w[2].conj() + z[2] * w[0].conj()) + z[1] * w[1].conj()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Causal {
    Negative,
    Null,
    Positive,
}

pub fn classify_vector(z: &C21Vector) -> Result<Causal> {
    let n = z.norm_sqr();
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    let q = hermitian(z, z).re;
    Ok(if q.abs() <= 1e-10 * n {
        Causal::Null
    } else if q < 0.0 {
        Causal::Negative
    } else {
        Causal::Positive
    })
}

/// A point of `∂H²_ℂ = 𝔥 ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint {
    Finite(HeisPoint),
    Infinity,
}

impl<'de> Deserialize<'de> for BoundaryPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Point(HeisPoint),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Point(p) => Ok(BoundaryPoint::Finite(p)),
            Repr::Tag(s) if s == "infinity" => Ok(BoundaryPoint::Infinity),
            Repr::Tag(s) => Err(serde::de::Error::custom(format!("expected \"infinity\", found {s:?}"))),
        }
    }
}

impl Serialize for BoundaryPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BoundaryPoint::Finite(p) => p.serialize(serializer),
            BoundaryPoint::Infinity => serializer.serialize_str("infinity"),
        }
    }
}

impl From<HeisPoint> for BoundaryPoint {
    fn from(p: HeisPoint) -> Self {
        BoundaryPoint::Finite(p)
    }
}

impl BoundaryPoint {
    pub const ORIGIN: BoundaryPoint = BoundaryPoint::Finite(HeisPoint::ORIGIN);

    pub fn finite(&self) -> Option<HeisPoint> {
        match self {
            BoundaryPoint::Finite(p) => Some(*p),
            BoundaryPoint::Infinity => None,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, BoundaryPoint::Infinity)
    }
}

pub fn lift_boundary(b: &BoundaryPoint) -> C21Vector {
    match b {
        BoundaryPoint::Infinity => C21Vector::real(1.0, 0.0, 0.0),
        BoundaryPoint::Finite(p) => {
            C21Vector::new(Complex64::new(-p.horizontal_norm_sqr(), p.t) / 2.0, p.z(), ONE)
        }
    }
}

/// A point `(z₁, z₂)` of `ℂ²`, meant to lie in the Siegel domain
/// `2Re(z₁) + |z₂|² < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiegelPoint {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl SiegelPoint {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        Self { z1, z2 }
    }

    pub fn siegel_value(&self) -> f64 {
        2.0 * self.z1.re + self.z2.norm_sqr()
    }

    pub fn standard_lift(&self) -> C21Vector {
        C21Vector::new(self.z1, self.z2, ONE)
    }
}

/// Bergman distance, from `cosh²(ρ/2) = ⟨z,w⟩⟨w,z⟩ / (⟨z,z⟩⟨w,w⟩)`.
pub fn bergman_distance(z: &SiegelPoint, w: &SiegelPoint) -> Result<f64> {
    for p in [z, w] {
        let v = p.siegel_value();
        if !(v < 0.0) {
            return Err(Error::NotInterior(v));
        }
    }
    let (lz, lw) = (z.standard_lift(), w.standard_lift());
    let ratio = hermitian(&lz, &lw).norm_sqr() / (hermitian(&lz, &lz).re * hermitian(&lw, &lw).re);
    // the ratio is >= 1 in exact arithmetic
    Ok(2.0 * ratio.max(1.0).sqrt().acosh())
}

/// The form matrix `H` (anti-diagonal ones).
pub fn form_matrix() -> Matrix3<Complex64> {
    Matrix3::new(ZERO, ZERO, ONE, ZERO, ONE, ZERO, ONE, ZERO, ZERO)
}

/// A 3×3 complex matrix preserving the Hermitian form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su21Matrix(Matrix3<Complex64>);

/// Relative tolerance on `G*HG = H`.
pub const FORM_TOLERANCE: f64 = 1e-10;

/// Largest entry of `|G*HG − H|`, divided by `max(1, max|g_ij|²)`.
pub fn form_defect(m: &Matrix3<Complex64>) -> f64 {
    let h = form_matrix();
    let d = m.adjoint() * h * m - h;
    let scale = m.iter().fold(1.0f64, |acc, c| acc.max(c.norm_sqr()));
    d.iter().fold(0.0f64, |acc, c| acc.max(c.norm())) / scale
}

impl Su21Matrix {
    pub fn new(m: Matrix3<Complex64>) -> Result<Self> {
        let defect = form_defect(&m);
        if defect <= FORM_TOLERANCE {
            Ok(Self(m))
        } else {
            Err(Error::FormViolation(defect))
        }
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.0
    }

    pub fn form_defect(&self) -> f64 {
        form_defect(&self.0)
    }

    pub fn mul(&self, other: &Su21Matrix) -> Su21Matrix {
        Su21Matrix(self.0 * other.0)
    }

    /// `G⁻¹ = H G* H` for form-preserving `G`.
    pub fn inverse(&self) -> Su21Matrix {
        let h = form_matrix();
        Su21Matrix(h * self.0.adjoint() * h)
    }

    pub fn apply(&self, v: &C21Vector) -> C21Vector {
        C21Vector(self.0 * v.0)
    }

    /// Left translation by `(ζ, τ)`.
    pub fn heisenberg_translation(p: &HeisPoint) -> Self {
        let zeta = p.z();
        Self(Matrix3::new(
            ONE,
            -zeta.conj(),
            Complex64::new(-p.horizontal_norm_sqr(), p.t) / 2.0,
            ZERO,
            ONE,
            zeta,
            ZERO,
            ZERO,
            ONE,
        ))
    }

    /// Rotation `z ↦ e^{iθ} z`, scaled to unit determinant.
    pub fn rotation(theta: f64) -> Self {
        let a = Complex64::from_polar(1.0, -theta / 3.0);
        let b = Complex64::from_polar(1.0, 2.0 * theta / 3.0);
        Self(Matrix3::from_diagonal(&Vector3::new(a, b, a)))
    }

    /// Dilation `(z, t) ↦ (δz, δ²t)`.
    pub fn dilation(delta: f64) -> Self {
        Self(Matrix3::from_diagonal(&Vector3::new(delta.into(), ONE, (1.0 / delta).into())))
    }

    /// The Korányi inversion, an involution swapping `o` and `∞` and fixing
    /// the unit sphere of the gauge setwise.
    pub fn inversion() -> Self {
        let m = -ONE;
        Self(Matrix3::new(ZERO, ZERO, m / 2.0, ZERO, m, ZERO, m * 2.0, ZERO, ZERO))
    }

    /// Matrix realizing a holomorphic similarity; `None` when `g` involves the
    /// (antiholomorphic) conjugation.
    pub fn from_similarity(g: &Similarity) -> Option<Self> {
        if g.conjugate {
            return None;
        }
        Some(
            Self::heisenberg_translation(&g.translation)
                .mul(&Self::rotation(g.theta))
                .mul(&Self::dilation(g.delta)),
        )
    }
}

impl Serialize for Su21Matrix {
    /// Row-major `[[[re, im], …], …]`.
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut rows = serializer.serialize_seq(Some(3))?;
        for i in 0..3 {
            let row: Vec<[f64; 2]> = (0..3).map(|k| [self.0[(i, k)].re, self.0[(i, k)].im]).collect();
            rows.serialize_element(&row)?;
        }
        rows.end()
    }
}

impl<'de> Deserialize<'de> for Su21Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = <[[[f64; 2]; 3]; 3]>::deserialize(d)?;
        let m = Matrix3::from_fn(|i, k| Complex64::new(rows[i][k][0], rows[i][k][1]));
        Su21Matrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// Relative threshold on `|v₃|` below which the image is `∞`.
pub const INFINITY_THRESHOLD: f64 = 1e-12;
/// Tolerance on the null condition of a dehomogenized image.
pub const NULL_TOLERANCE: f64 = 1e-9;

/// Projective action on a null vector, without the form check on `G`.
pub(crate) fn project_null(v: &C21Vector) -> Result<BoundaryPoint> {
    let v = &v.0;
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if v[2].norm() <= INFINITY_THRESHOLD * norm {
        return Ok(BoundaryPoint::Infinity);
    }
    let z1 = v[0] / v[2];
    let z2 = v[1] / v[2];
    let defect = (z1.re + z2.norm_sqr() / 2.0).abs();
    if defect > NULL_TOLERANCE * (1.0 + z1.norm()) {
        return Err(Error::LiftInconsistency(defect));
    }
    Ok(BoundaryPoint::Finite(HeisPoint::new(z2.re, z2.im, 2.0 * z1.im)))
}

pub fn act_boundary(g: &Su21Matrix, b: &BoundaryPoint) -> Result<BoundaryPoint> {
    let defect = g.form_defect();
    if defect > FORM_TOLERANCE {
        return Err(Error::FormViolation(defect));
    }
    project_null(&g.apply(&lift_boundary(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisector::Aabb;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
    }

    fn finite(b: BoundaryPoint) -> HeisPoint {
        b.finite().expect("finite point")
    }

    fn close(a: &HeisPoint, b: &HeisPoint, tol: f64) -> bool {
        (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol && (a.t - b.t).abs() <= tol
    }

    fn random_matrix(rng: &mut ChaCha8Rng) -> Su21Matrix {
        let g = Similarity::new(Aabb::cube(2.0).sample(rng), rng.gen_range(-PI..PI), rng.gen_range(0.3..3.0), false)
            .unwrap();
        let m = Su21Matrix::from_similarity(&g).unwrap();
        if rng.gen() {
            m.mul(&Su21Matrix::inversion())
        } else {
            m
        }
    }

    #[test]
    fn hermitian_form_examples() {
        let e1 = C21Vector::real(1.0, 0.0, 0.0);
        assert_eq!(hermitian(&e1, &e1), ZERO);
        let v = C21Vector::real(-1.0, 0.0, 1.0);
        assert_eq!(hermitian(&v, &v), Complex64::new(-2.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let a = C21Vector::new(rand_c(&mut rng), rand_c(&mut rng), rand_c(&mut rng));
            let b = C21Vector::new(rand_c(&mut rng), rand_c(&mut rng), rand_c(&mut rng));
            assert_eq!(hermitian(&a, &b), hermitian(&b, &a).conj());
            assert_eq!(hermitian(&a, &a).im, 0.0);
        }
    }

    #[test]
    fn vector_classification() {
        assert_eq!(classify_vector(&C21Vector::real(-1.0, 0.0, 1.0)).unwrap(), Causal::Negative);
        assert_eq!(classify_vector(&C21Vector::real(1.0, 0.0, 0.0)).unwrap(), Causal::Null);
        assert_eq!(classify_vector(&C21Vector::real(0.0, 1.0, 0.0)).unwrap(), Causal::Positive);
        assert!(matches!(classify_vector(&C21Vector::real(0.0, 0.0, 0.0)), Err(Error::ZeroVector)));
    }

    #[test]
    fn lifts() {
        assert_eq!(lift_boundary(&BoundaryPoint::ORIGIN), C21Vector::real(0.0, 0.0, 1.0));
        assert_eq!(lift_boundary(&BoundaryPoint::Infinity), C21Vector::real(1.0, 0.0, 0.0));
        let v = lift_boundary(&HeisPoint::new(1.0, 0.0, 2.0).into());
        assert_eq!(v, C21Vector::new(Complex64::new(-0.5, 1.0), ONE, ONE));
        assert_eq!(hermitian(&v, &v).norm(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let p = Aabb::cube(10.0).sample(&mut rng);
            let v = lift_boundary(&p.into());
            assert!(hermitian(&v, &v).norm() <= 1e-12 * v.norm_sqr().max(1.0));
        }
    }

    #[test]
    fn bergman_examples() {
        let a = SiegelPoint::new((-1.0).into(), ZERO);
        let b = SiegelPoint::new((-2.0).into(), ZERO);
        assert!((bergman_distance(&a, &b).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(bergman_distance(&a, &a).unwrap(), 0.0);
        let out = SiegelPoint::new(ONE, ZERO);
        assert!(matches!(bergman_distance(&a, &out), Err(Error::NotInterior(_))));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let z2 = rand_c(&mut rng);
            let p = SiegelPoint::new(Complex64::new(-z2.norm_sqr() / 2.0 - rng.gen_range(0.1..2.0), rng.gen()), z2);
            let w2 = rand_c(&mut rng);
            let q = SiegelPoint::new(Complex64::new(-w2.norm_sqr() / 2.0 - rng.gen_range(0.1..2.0), 0.3), w2);
            assert_eq!(bergman_distance(&p, &q).unwrap(), bergman_distance(&q, &p).unwrap());
        }
    }

    #[test]
    fn generators_preserve_the_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(Su21Matrix::inversion().form_defect() < 1e-15);
        assert!((Su21Matrix::inversion().matrix().determinant() - ONE).norm() < 1e-15);
        for _ in 0..100 {
            let (a, b) = (random_matrix(&mut rng), random_matrix(&mut rng));
            assert!(a.mul(&b).form_defect() < 1e-9);
            let prod = a.mul(&a.inverse());
            assert!((prod.matrix() - Matrix3::identity()).norm() < 1e-9);
        }
        let bad = Matrix3::from_diagonal(&Vector3::new(ONE, ONE, Complex64::new(2.0, 0.0)));
        assert!(matches!(Su21Matrix::new(bad), Err(Error::FormViolation(_))));
    }

    #[test]
    fn action_examples() {
        let p = HeisPoint::new(0.3, -1.0, 2.0);
        assert_eq!(act_boundary(&Su21Matrix::identity(), &p.into()).unwrap(), BoundaryPoint::Finite(p));

        let l = Su21Matrix::from_similarity(&Similarity::translation(HeisPoint::new(1.0, 0.0, 0.0))).unwrap();
        assert_eq!(act_boundary(&l, &BoundaryPoint::ORIGIN).unwrap(), HeisPoint::new(1.0, 0.0, 0.0).into());

        let inv = Su21Matrix::inversion();
        let img = finite(act_boundary(&inv, &HeisPoint::new(1.0, 0.0, 0.0).into()).unwrap());
        assert!(close(&img, &HeisPoint::new(-1.0, 0.0, 0.0), 1e-15));
        assert_eq!(act_boundary(&inv, &BoundaryPoint::ORIGIN).unwrap(), BoundaryPoint::Infinity);
        assert_eq!(act_boundary(&inv, &BoundaryPoint::Infinity).unwrap(), BoundaryPoint::ORIGIN);
    }

    #[test]
    fn matrices_agree_with_similarities() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let g = Similarity::new(Aabb::cube(3.0).sample(&mut rng), rng.gen_range(-PI..PI), rng.gen_range(0.2..4.0), false)
                .unwrap();
            let m = Su21Matrix::from_similarity(&g).unwrap();
            let p = Aabb::cube(3.0).sample(&mut rng);
            let img = finite(act_boundary(&m, &p.into()).unwrap());
            assert!(close(&img, &g.apply(&p), 1e-9));
            assert_eq!(act_boundary(&m, &BoundaryPoint::Infinity).unwrap(), BoundaryPoint::Infinity);
        }
    }

    #[test]
    fn action_is_a_group_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let (a, b) = (random_matrix(&mut rng), random_matrix(&mut rng));
            let p: BoundaryPoint = Aabb::cube(3.0).sample(&mut rng).into();
            let lhs = act_boundary(&a.mul(&b), &p).unwrap();
            let rhs = act_boundary(&a, &act_boundary(&b, &p).unwrap()).unwrap();
            match (lhs, rhs) {
                (BoundaryPoint::Finite(x), BoundaryPoint::Finite(y)) => {
                    let scale = 1.0 + x.gauge();
                    assert!(close(&x, &y, 1e-9 * scale * scale), "{x} vs {y}");
                }
                (l, r) => assert_eq!(l, r),
            }
        }
    }

    #[test]
    fn non_preserving_matrix_is_rejected_by_the_action() {
        let m = Su21Matrix(Matrix3::from_diagonal(&Vector3::new(ONE, ONE, Complex64::new(3.0, 0.0))));
        assert!(matches!(act_boundary(&m, &BoundaryPoint::ORIGIN), Err(Error::FormViolation(_))));
    }

    #[test]
    fn serde_shapes() {
        let m = Su21Matrix::dilation(2.0);
        let v = serde_json::to_value(m).unwrap();
        assert_eq!(v[0][0], serde_json::json!([2.0, 0.0]));
        assert_eq!(v[2][2], serde_json::json!([0.5, 0.0]));
        let back: Su21Matrix = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);

        assert_eq!(serde_json::to_string(&BoundaryPoint::Infinity).unwrap(), "\"infinity\"");
        let b: BoundaryPoint = serde_json::from_str("[1.0,2.0,3.0]").unwrap();
        assert_eq!(b, HeisPoint::new(1.0, 2.0, 3.0).into());
        let b: BoundaryPoint = serde_json::from_str("\"infinity\"").unwrap();
        assert_eq!(b, BoundaryPoint::Infinity);
    }
}
