//! Korányi bisectors as cubic implicit surfaces.
//!
//! The field of a pair `(p₁, p₂)` is `d_K(p₁, p)⁴ − d_K(p₂, p)⁴`, expanded
//! symbolically through the group law. The `|z|⁴` parts of the two sides
//! agree identically, so the difference has degree at most three.

use crate::error::{Error, Result};
use crate::heis::{dist_k, HeisPoint};
use crate::poly::{Monomial, Polynomial};
use crate::similarity::{classify_pair, Similarity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::{Serialize, SerializeMap, Serializer};

/// Axis-aligned box `[min, max]` in `(x, y, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self> {
        if (0..3).any(|i| !(min[i] < max[i]) || !min[i].is_finite() || !max[i].is_finite()) {
            return Err(Error::InvalidArgument(format!("empty or non-finite box {min:?}..{max:?}")));
        }
        Ok(Self { min, max })
    }

    /// `[−h₀, h₀] × [−h₁, h₁] × [−h₂, h₂]`
    pub fn centered(half: [f64; 3]) -> Result<Self> {
        Self::new(half.map(|h| -h), half)
    }

    pub fn cube(half: f64) -> Self {
        Self::centered([half; 3]).expect("positive half-width")
    }

    pub fn extent(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.max[i] - self.min[i])
    }

    pub fn contains(&self, p: &HeisPoint) -> bool {
        let a = p.to_array();
        (0..3).all(|i| a[i] >= self.min[i] && a[i] <= self.max[i])
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> HeisPoint {
        HeisPoint::from([0, 1, 2].map(|i| rng.gen_range(self.min[i]..self.max[i])))
    }
}

/// The group law with polynomial coordinates; mirrors [`crate::heis::mul`].
fn symbolic_mul(p: &[Polynomial; 3], q: &[Polynomial; 3]) -> [Polynomial; 3] {
    let twisted = p[1].mul(&q[0]).sub(&p[0].mul(&q[1])).scale(2.0);
    [p[0].add(&q[0]), p[1].add(&q[1]), p[2].add(&q[2]).add(&twisted)]
}

fn constant_point(p: &HeisPoint) -> [Polynomial; 3] {
    p.to_array().map(Polynomial::constant)
}

/// `d_K(focus, p)⁴` as a polynomial in the coordinates of `p`.
pub fn distance_pow4_polynomial(focus: &HeisPoint) -> Polynomial {
    let p = [0, 1, 2].map(Polynomial::coordinate);
    let [dx, dy, dt] = symbolic_mul(&constant_point(&focus.inverse()), &p);
    let r2 = dx.mul(&dx).add(&dy.mul(&dy));
    r2.mul(&r2).add(&dt.mul(&dt))
}

/// The untruncated quartic difference `d_K(p₁,·)⁴ − d_K(p₂,·)⁴`.
pub fn quartic_difference(p1: &HeisPoint, p2: &HeisPoint) -> Polynomial {
    distance_pow4_polynomial(p1).sub(&distance_pow4_polynomial(p2))
}

/// A polynomial field of degree at most three, normalized so that its
/// largest coefficient has magnitude one.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicField {
    poly: Polynomial,
    foci: Option<(HeisPoint, HeisPoint)>,
    scale: f64,
}

impl CubicField {
    /// Wraps an arbitrary polynomial of degree `<= 3`, normalizing it.
    pub fn from_polynomial(poly: Polynomial) -> Result<Self> {
        if poly.degree() > 3 {
            return Err(Error::InvalidArgument(format!("degree {} exceeds 3", poly.degree())));
        }
        let scale = poly.max_abs_coefficient();
        if scale == 0.0 {
            return Err(Error::InvalidArgument("zero polynomial".into()));
        }
        Ok(Self { poly: poly.scale(1.0 / scale), foci: None, scale })
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn foci(&self) -> Option<(HeisPoint, HeisPoint)> {
        self.foci
    }

    /// Positive factor removed by normalization.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn coefficient(&self, m: Monomial) -> f64 {
        self.poly.coefficient(&m)
    }

    pub fn coefficients(&self) -> Vec<(Monomial, f64)> {
        Monomial::up_to_degree(3).into_iter().map(|m| (m, self.coefficient(m))).collect()
    }

    pub fn residual(&self, p: &HeisPoint) -> f64 {
        self.poly.eval(p.to_array())
    }

    /// The field `F ∘ g⁻¹`, whose zero set is the `g`-image of this one.
    pub fn transport(&self, g: &Similarity) -> CubicField {
        let (m, b) = g.invert().affine();
        let moved = self.poly.compose_affine(&m, &b).truncate(3);
        let mut out = CubicField::from_polynomial(moved).expect("similarities are invertible affine maps");
        out.scale *= self.scale;
        out.foci = self.foci.map(|(a, c)| (g.apply(&a), g.apply(&c)));
        out
    }
}

impl Serialize for CubicField {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut coeffs = self.coefficients();
        coeffs.sort_by_key(|(m, _)| m.key());
        let mut map = serializer.serialize_map(Some(coeffs.len()))?;
        for (m, c) in coeffs {
            map.serialize_entry(&m.key(), &c)?;
        }
        map.end()
    }
}

pub fn bisector_field(p1: &HeisPoint, p2: &HeisPoint) -> Result<CubicField> {
    classify_pair(p1, p2)?;
    let quartic = quartic_difference(p1, p2);
    let scale = quartic.max_abs_coefficient();
    debug_assert!(
        quartic.terms().filter(|(m, _)| m.degree() > 3).all(|(_, c)| c.abs() <= 1e-9 * scale),
        "quartic terms of the bisector field must cancel"
    );
    let mut field = CubicField::from_polynomial(quartic.truncate(3))?;
    field.foci = Some((*p1, *p2));
    Ok(field)
}

pub fn residual(field: &CubicField, p: &HeisPoint) -> f64 {
    field.residual(p)
}

/// Equidistance defect `|d_K(p₁,p) − d_K(p₂,p)|`.
pub fn equidistance_defect(p1: &HeisPoint, p2: &HeisPoint, p: &HeisPoint) -> f64 {
    (dist_k(p1, p) - dist_k(p2, p)).abs()
}

/// Maximum accepted equidistance defect of a sampled point.
pub const SAMPLE_TOLERANCE: f64 = 1e-9;
const CHORD_SUBDIVISIONS: usize = 8;

/// Root of `field` on the segment `a → b`, if it changes sign there.
fn chord_root(field: &CubicField, a: &HeisPoint, b: &HeisPoint) -> Option<HeisPoint> {
    let (a, b) = (a.to_array(), b.to_array());
    let at = |s: f64| HeisPoint::from([0, 1, 2].map(|i| a[i] + s * (b[i] - a[i])));
    let f = |s: f64| field.residual(&at(s));

    let mut prev = (0.0, f(0.0));
    for k in 1..=CHORD_SUBDIVISIONS {
        let s = k as f64 / CHORD_SUBDIVISIONS as f64;
        let cur = (s, f(s));
        if prev.1 == 0.0 {
            return Some(at(prev.0));
        }
        if cur.1 == 0.0 {
            return Some(at(cur.0));
        }
        if prev.1.signum() != cur.1.signum() {
            let (mut lo, mut hi, flo) = (prev.0, cur.0, prev.1);
            while hi - lo > f64::EPSILON * hi.abs().max(1e-300) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    return Some(at(mid));
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let s = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
            return Some(at(s));
        }
        prev = cur;
    }
    None
}

/// Samples `n` points of the Korányi bisector of `(p1, p2)` inside `region`.
///
/// Random chords of the box are bracketed and bisected; points whose metric
/// equidistance defect exceeds [`SAMPLE_TOLERANCE`] are discarded. The chord
/// endpoints are drawn sequentially from `seed`, so the output does not depend
/// on the number of worker threads.
pub fn sample_bisector(p1: &HeisPoint, p2: &HeisPoint, region: &Aabb, n: usize, seed: u64) -> Result<Vec<HeisPoint>> {
    let field = bisector_field(p1, p2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = 100 * n.max(1);
    let mut attempts = 0;
    let mut found = Vec::with_capacity(n);
    while found.len() < n && attempts < budget {
        let batch = (2 * (n - found.len())).max(64).min(budget - attempts);
        let chords: Vec<(HeisPoint, HeisPoint)> =
            (0..batch).map(|_| (region.sample(&mut rng), region.sample(&mut rng))).collect();
        attempts += batch;
        let roots: Vec<Option<HeisPoint>> = chords
            .par_iter()
            .map(|(a, b)| chord_root(&field, a, b).filter(|p| equidistance_defect(p1, p2, p) <= SAMPLE_TOLERANCE))
            .collect();
        found.extend(roots.into_iter().flatten().take(n - found.len()));
    }
    if found.is_empty() {
        return Err(Error::EmptyIntersection { attempts });
    }
    if found.len() < n {
        return Err(Error::InsufficientSamples { found: found.len(), requested: n });
    }
    Ok(found)
}
