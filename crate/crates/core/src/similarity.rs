//! The similarity group of the Heisenberg group with the Korányi metric.
//!
//! Every element is kept in the factored normal form
//! `L_c ∘ R_θ ∘ D_δ ∘ j^ε`: conjugation innermost, then dilation, rotation
//! and finally a left translation. Since `j`, `R_θ` and `D_δ` are group
//! automorphisms, any word in the generators reduces to this form using
//! `j∘L_p = L_{j(p)}∘j`, `j∘R_θ = R_{−θ}∘j` and `D_δ∘L_p = L_{D_δ(p)}∘D_δ`.

use crate::error::{Error, Result};
use crate::heis::{gauge, inverse, mul, HeisPoint};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub translation: HeisPoint,
    pub theta: f64,
    pub delta: f64,
    pub conjugate: bool,
}

impl Default for Similarity {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Wraps an angle into `(−π, π]`.
fn wrap_angle(theta: f64) -> f64 {
    let mut a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

pub fn rotate(theta: f64, p: &HeisPoint) -> HeisPoint {
    let (s, c) = theta.sin_cos();
    HeisPoint::new(c * p.x - s * p.y, s * p.x + c * p.y, p.t)
}

pub fn dilate(delta: f64, p: &HeisPoint) -> HeisPoint {
    HeisPoint::new(delta * p.x, delta * p.y, delta * delta * p.t)
}

pub fn conjugate(p: &HeisPoint) -> HeisPoint {
    HeisPoint::new(p.x, -p.y, -p.t)
}

impl Similarity {
    pub const IDENTITY: Similarity = Similarity {
        translation: HeisPoint::ORIGIN,
        theta: 0.0,
        delta: 1.0,
        conjugate: false,
    };

    pub fn new(translation: HeisPoint, theta: f64, delta: f64, conjugate: bool) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {delta}")));
        }
        if !translation.is_finite() || !theta.is_finite() {
            return Err(Error::InvalidArgument("non-finite similarity parameter".into()));
        }
        Ok(Self { translation, theta: wrap_angle(theta), delta, conjugate })
    }

    pub fn translation(c: HeisPoint) -> Self {
        Self { translation: c, ..Self::IDENTITY }
    }

    pub fn rotation(theta: f64) -> Self {
        Self { theta: wrap_angle(theta), ..Self::IDENTITY }
    }

    /// # Panics
    /// If `delta` is not a positive finite number.
    pub fn dilation(delta: f64) -> Self {
        assert!(delta > 0.0 && delta.is_finite(), "dilation factor must be positive");
        Self { delta, ..Self::IDENTITY }
    }

    pub fn conjugation() -> Self {
        Self { conjugate: true, ..Self::IDENTITY }
    }

    pub fn apply(&self, p: &HeisPoint) -> HeisPoint {
        apply(self, p)
    }

    pub fn compose(&self, inner: &Similarity) -> Similarity {
        compose(self, inner)
    }

    pub fn invert(&self) -> Similarity {
        invert(self)
    }

    pub fn scale_factor(&self) -> f64 {
        self.delta
    }

    /// The linear part of the map `p ↦ apply(self, p)` on `ℝ³`, together with
    /// its offset: similarities act on `(x, y, t)` as affine maps.
    pub fn affine(&self) -> ([[f64; 3]; 3], [f64; 3]) {
        let mut cols = [[0.0; 3]; 3];
        let origin = self.apply(&HeisPoint::ORIGIN);
        for (k, col) in cols.iter_mut().enumerate() {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            let img = self.apply(&HeisPoint::from(e)).to_array();
            for i in 0..3 {
                col[i] = img[i] - origin.to_array()[i];
            }
        }
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for (k, col) in cols.iter().enumerate() {
                m[i][k] = col[i];
            }
        }
        (m, origin.to_array())
    }
}

/// `L_c(R_θ(D_δ(j^ε(p))))`
pub fn apply(g: &Similarity, p: &HeisPoint) -> HeisPoint {
    let q = if g.conjugate { conjugate(p) } else { *p };
    let q = rotate(g.theta, &dilate(g.delta, &q));
    mul(&g.translation, &q)
}

/// `outer ∘ inner`, reduced to normal form.
pub fn compose(outer: &Similarity, inner: &Similarity) -> Similarity {
    let sign = if outer.conjugate { -1.0 } else { 1.0 };
    Similarity {
        // the translation part of any element is the image of the origin
        translation: apply(outer, &inner.translation),
        theta: wrap_angle(outer.theta + sign * inner.theta),
        delta: outer.delta * inner.delta,
        conjugate: outer.conjugate ^ inner.conjugate,
    }
}

pub fn invert(g: &Similarity) -> Similarity {
    // g⁻¹ = j^ε ∘ D_{1/δ} ∘ R_{−θ} ∘ L_{c⁻¹}
    let mut h = Similarity::translation(inverse(&g.translation));
    h = compose(&Similarity::rotation(-g.theta), &h);
    h = compose(&Similarity::dilation(1.0 / g.delta), &h);
    if g.conjugate {
        h = compose(&Similarity::conjugation(), &h);
    }
    h
}

pub fn scale_factor(g: &Similarity) -> f64 {
    g.delta
}

/// Orbit type of an ordered pair of distinct points under `Sim(𝔥)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PairClass {
    /// Same vertical line (an infinite chain).
    Vertical,
    /// `p₁⁻¹ * p₂` has zero vertical part.
    Planar,
    /// Neither; `iota = |s| / |w|²` is a complete invariant of the pair.
    Generic { iota: f64 },
}

impl PairClass {
    pub fn iota(&self) -> Option<f64> {
        match self {
            PairClass::Vertical => None,
            PairClass::Planar => Some(0.0),
            PairClass::Generic { iota } => Some(*iota),
        }
    }
}

/// Relative tolerance for the `w = 0` / `s = 0` branch decisions.
pub const CLASS_TOLERANCE: f64 = 1e-9;

pub fn classify_pair(p1: &HeisPoint, p2: &HeisPoint) -> Result<PairClass> {
    let d = mul(&inverse(p1), p2);
    let w = d.horizontal_norm_sqr().sqrt();
    let s = d.t.abs();
    let tau = CLASS_TOLERANCE * gauge(&d).max(1.0);
    match (w <= tau, s <= tau) {
        (true, true) => Err(Error::DegeneratePair),
        (true, false) => Ok(PairClass::Vertical),
        (false, true) => Ok(PairClass::Planar),
        (false, false) => Ok(PairClass::Generic { iota: s / (w * w) }),
    }
}

/// Canonical representative of a pair class.
pub fn canonical_pair(class: &PairClass) -> (HeisPoint, HeisPoint) {
    match class {
        PairClass::Vertical => (HeisPoint::new(0.0, 0.0, -1.0), HeisPoint::new(0.0, 0.0, 1.0)),
        PairClass::Planar => (HeisPoint::new(-1.0, 0.0, 0.0), HeisPoint::new(1.0, 0.0, 0.0)),
        PairClass::Generic { iota } => (HeisPoint::new(-1.0, 0.0, 0.0), HeisPoint::new(1.0, 0.0, 4.0 * iota)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub similarity: Similarity,
    pub canonical: (HeisPoint, HeisPoint),
    pub class: PairClass,
}

/// Finds a similarity moving `(p1, p2)` onto the canonical pair of its class.
pub fn normalize_pair(p1: &HeisPoint, p2: &HeisPoint) -> Result<Normalization> {
    let class = classify_pair(p1, p2)?;
    let mut g = Similarity::translation(inverse(p1));
    let d = g.apply(p2);

    let final_offset = match class {
        PairClass::Vertical => {
            g = compose(&Similarity::dilation((2.0 / d.t.abs()).sqrt()), &g);
            HeisPoint::new(0.0, 0.0, -1.0)
        }
        PairClass::Planar | PairClass::Generic { .. } => {
            let w = d.z();
            g = compose(&Similarity::rotation(-w.arg()), &g);
            g = compose(&Similarity::dilation(2.0 / w.norm()), &g);
            HeisPoint::new(-1.0, 0.0, 0.0)
        }
    };
    if g.apply(p2).t < 0.0 {
        g = compose(&Similarity::conjugation(), &g);
    }
    g = compose(&Similarity::translation(final_offset), &g);

    Ok(Normalization { similarity: g, canonical: canonical_pair(&class), class })
}
