//! Heisenberg group arithmetic and the Korányi (Cygan) metric.
//!
//! Points are stored as three reals `(x, y, t)`; the horizontal coordinate
//! `z = x + iy` is only ever a view. The group law is
//! `(z, t) * (w, s) = (z + w, t + s + 2 Im(z w̄))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A point `(z, t)` of the Heisenberg group, `z = x + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct HeisPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl From<[f64; 3]> for HeisPoint {
    fn from([x, y, t]: [f64; 3]) -> Self {
        Self { x, y, t }
    }
}

impl From<HeisPoint> for [f64; 3] {
    fn from(p: HeisPoint) -> Self {
        [p.x, p.y, p.t]
    }
}

impl HeisPoint {
    pub const ORIGIN: HeisPoint = HeisPoint { x: 0.0, y: 0.0, t: 0.0 };

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t }
    }

    pub fn from_complex(z: Complex64, t: f64) -> Self {
        Self { x: z.re, y: z.im, t }
    }

    /// The horizontal coordinate as a complex number.
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// `|z|²`
    pub fn horizontal_norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        self.into()
    }

    /// Group product `self * other`.
    pub fn mul(&self, other: &HeisPoint) -> HeisPoint {
        mul(self, other)
    }

    pub fn inverse(&self) -> HeisPoint {
        inverse(self)
    }

    pub fn gauge(&self) -> f64 {
        gauge(self)
    }
}

impl std::ops::Mul for HeisPoint {
    type Output = HeisPoint;

    fn mul(self, rhs: HeisPoint) -> HeisPoint {
        mul(&self, &rhs)
    }
}

impl fmt::Display for HeisPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.t)
    }
}

/// `2 Im(z w̄)` written out in real coordinates.
#[inline]
fn twisted(p: &HeisPoint, q: &HeisPoint) -> f64 {
    2.0 * (p.y * q.x - p.x * q.y)
}

pub fn mul(p: &HeisPoint, q: &HeisPoint) -> HeisPoint {
    HeisPoint {
        x: p.x + q.x,
        y: p.y + q.y,
        t: p.t + q.t + twisted(p, q),
    }
}

pub fn inverse(p: &HeisPoint) -> HeisPoint {
    HeisPoint { x: -p.x, y: -p.y, t: -p.t }
}

/// Korányi gauge `(|z|⁴ + t²)^{1/4}`.
pub fn gauge(p: &HeisPoint) -> f64 {
    // hypot keeps |z|⁴ + t² from overflowing for large coordinates
    p.horizontal_norm_sqr().hypot(p.t).sqrt()
}

/// Korányi-Cygan distance `|p⁻¹ * q|_K`.
pub fn dist_k(p: &HeisPoint, q: &HeisPoint) -> f64 {
    gauge(&mul(&inverse(p), q))
}

/// Fourth power of the Korányi distance, a polynomial in the coordinates.
pub fn dist_k_pow4(p: &HeisPoint, q: &HeisPoint) -> f64 {
    let d = mul(&inverse(p), q);
    let r2 = d.horizontal_norm_sqr();
    r2 * r2 + d.t * d.t
}
