//! Sparse real polynomials in `(x, y, t)`.
//!
//! Only what the bisector and curvature code needs: ring operations, affine
//! substitution, and evaluation with exact first and second partials.

use std::collections::BTreeMap;
use std::fmt;

/// Exponents `(a, b, c)` of the monomial `x^a y^b t^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub [u32; 3]);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Key of the form `x2y1t0`.
    pub fn key(&self) -> String {
        let [a, b, c] = self.0;
        format!("x{a}y{b}t{c}")
    }

    /// All monomials of total degree `<= max_degree`, in graded lexicographic order.
    pub fn up_to_degree(max_degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    out.push(Monomial([a, b, d - a - b]));
                }
            }
        }
        out
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, f64>,
}

/// Value, gradient and Hessian of a function of `(x, y, t)` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 3],
    pub hess: [[f64; 3]; 3],
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms([(Monomial([0, 0, 0]), c)])
    }

    /// The coordinate function `x`, `y` or `t` (`axis` 0, 1, 2).
    pub fn coordinate(axis: usize) -> Self {
        let mut e = [0; 3];
        e[axis] = 1;
        Self::from_terms([(Monomial(e), 1.0)])
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, f64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&m);
        }
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &f64)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (*m, c * k)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let e = [m1.0[0] + m2.0[0], m1.0[1] + m2.0[1], m1.0[2] + m2.0[2]];
                out.add_term(Monomial(e), c1 * c2);
            }
        }
        out
    }

    pub fn powi(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(1.0), |acc, _| acc.mul(self))
    }

    /// Keeps only the terms of total degree `<= max_degree`.
    pub fn truncate(&self, max_degree: u32) -> Self {
        Self::from_terms(self.terms.iter().filter(|(m, _)| m.degree() <= max_degree).map(|(m, c)| (*m, *c)))
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let k = m.0[axis];
            if k > 0 {
                let mut e = m.0;
                e[axis] -= 1;
                out.add_term(Monomial(e), c * k as f64);
            }
        }
        out
    }

    /// `p ∘ A` for the affine map `A(v) = m·v + b`.
    pub fn compose_affine(&self, m: &[[f64; 3]; 3], b: &[f64; 3]) -> Self {
        let images: Vec<Polynomial> = (0..3)
            .map(|i| {
                let mut q = Self::constant(b[i]);
                for (k, &c) in m[i].iter().enumerate() {
                    q = q.add(&Self::coordinate(k).scale(c));
                }
                q
            })
            .collect();
        let mut out = Self::zero();
        for (mono, c) in &self.terms {
            let term = images[0]
                .powi(mono.0[0])
                .mul(&images[1].powi(mono.0[1]))
                .mul(&images[2].powi(mono.0[2]));
            out = out.add(&term.scale(*c));
        }
        out
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c * p[0].powi(m.0[0] as i32) * p[1].powi(m.0[1] as i32) * p[2].powi(m.0[2] as i32))
            .sum()
    }

    /// Value with exact first and second partial derivatives.
    pub fn jet(&self, p: [f64; 3]) -> Jet {
        // pw[axis][k] = p[axis]^k and its first two derivative factors
        let max = self.degree() as usize + 1;
        let mut pw = vec![[1.0; 3]; max];
        for k in 1..max {
            for axis in 0..3 {
                pw[k][axis] = pw[k - 1][axis] * p[axis];
            }
        }
        let power = |axis: usize, e: u32, d: u32| -> f64 {
            if e < d {
                return 0.0;
            }
            let fall: u32 = (0..d).map(|i| e - i).product();
            fall as f64 * pw[(e - d) as usize][axis]
        };
        let mut jet = Jet::default();
        for (m, c) in &self.terms {
            let e = m.0;
            let v = [power(0, e[0], 0), power(1, e[1], 0), power(2, e[2], 0)];
            let d1 = [power(0, e[0], 1), power(1, e[1], 1), power(2, e[2], 1)];
            let d2 = [power(0, e[0], 2), power(1, e[1], 2), power(2, e[2], 2)];
            jet.value += c * v[0] * v[1] * v[2];
            jet.grad[0] += c * d1[0] * v[1] * v[2];
            jet.grad[1] += c * v[0] * d1[1] * v[2];
            jet.grad[2] += c * v[0] * v[1] * d1[2];
            jet.hess[0][0] += c * d2[0] * v[1] * v[2];
            jet.hess[1][1] += c * v[0] * d2[1] * v[2];
            jet.hess[2][2] += c * v[0] * v[1] * d2[2];
            jet.hess[0][1] += c * d1[0] * d1[1] * v[2];
            jet.hess[0][2] += c * d1[0] * v[1] * d1[2];
            jet.hess[1][2] += c * v[0] * d1[1] * d1[2];
        }
        jet.hess[1][0] = jet.hess[0][1];
        jet.hess[2][0] = jet.hess[0][2];
        jet.hess[2][1] = jet.hess[1][2];
        jet
    }
}

/// Real roots of `c[0] + c[1] s + c[2] s² + c[3] s³` in `[lo, hi]`, ascending.
///
/// Splits the interval at the critical points, then bisects every monotone
/// piece with a sign change. Leading coefficients that vanish drop the degree.
pub fn cubic_roots_in(c: [f64; 4], lo: f64, hi: f64) -> Vec<f64> {
    let eval = |s: f64| ((c[3] * s + c[2]) * s + c[1]) * s + c[0];
    let mut breaks = vec![lo];
    // critical points: c1 + 2 c2 s + 3 c3 s² = 0
    let (qa, qb, qc) = (3.0 * c[3], 2.0 * c[2], c[1]);
    if qa != 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let mut r = [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)];
            r.sort_by(f64::total_cmp);
            breaks.extend(r.into_iter().filter(|s| *s > lo && *s < hi));
        }
    } else if qb != 0.0 {
        let s = -qc / qb;
        if s > lo && s < hi {
            breaks.push(s);
        }
    }
    breaks.push(hi);

    let mut roots: Vec<f64> = Vec::new();
    for w in breaks.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut fa, fb) = (eval(a), eval(b));
        if fa == 0.0 {
            if roots.last().is_none_or(|r| *r != a) {
                roots.push(a);
            }
            continue;
        }
        if fb == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = eval(m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        roots.push(if eval(a).abs() <= eval(b).abs() { a } else { b });
    }
    if eval(hi) == 0.0 && roots.last().is_none_or(|r| *r != hi) {
        roots.push(hi);
    }
    roots
}
