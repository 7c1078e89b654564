//! C interface to `heisbis`.
//!
//! Every fallible function returns an [`HbStatus`] and writes its result
//! through an out-pointer, which is left untouched on failure. Objects are
//! opaque handles created by `hb_*_new` and released by the matching
//! `hb_*_free`; passing `NULL` to a free function is a no-op.

use heisbis::bisector::{bisector_field, CubicField};
use heisbis::boundary::BoundaryPoint;
use heisbis::curvature::{mean_curvature, s1_curvature};
use heisbis::heis::{dist_k, HeisPoint};
use heisbis::poly::Monomial;
use heisbis::similarity::{normalize_pair, PairClass, Similarity};
use heisbis::spinal::SpinalSphere;
use heisbis::Error;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

/// A point of the boundary sphere; `point` is ignored when `at_infinity`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbBoundaryPoint {
    pub point: HbPoint,
    pub at_infinity: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HbStatus {
    Ok = 0,
    NullPointer = 1,
    NonFinite = 2,
    InvalidArgument = 3,
    DegeneratePair = 4,
    CoincidentVertices = 5,
    CharacteristicPoint = 6,
    Numerical = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HbPairClass {
    Vertical = 0,
    Planar = 1,
    Generic = 2,
}

pub struct HbCubicField(CubicField);
pub struct HbSimilarity(Similarity);
pub struct HbSpinalSphere(SpinalSphere);

impl From<Error> for HbStatus {
    fn from(e: Error) -> Self {
        match e {
            Error::DegeneratePair => HbStatus::DegeneratePair,
            Error::CoincidentVertices => HbStatus::CoincidentVertices,
            Error::CharacteristicPoint(_) => HbStatus::CharacteristicPoint,
            Error::InvalidArgument(_) => HbStatus::InvalidArgument,
            _ => HbStatus::Numerical,
        }
    }
}

fn point(p: HbPoint) -> Result<HeisPoint, HbStatus> {
    let q = HeisPoint::new(p.x, p.y, p.t);
    if q.is_finite() {
        Ok(q)
    } else {
        Err(HbStatus::NonFinite)
    }
}

fn boundary(b: HbBoundaryPoint) -> Result<BoundaryPoint, HbStatus> {
    if b.at_infinity {
        Ok(BoundaryPoint::Infinity)
    } else {
        point(b.point).map(BoundaryPoint::Finite)
    }
}

/// Runs `f` and writes its value to `out`, mapping errors and panics.
fn guarded<T>(out: *mut T, f: impl FnOnce() -> Result<T, HbStatus>) -> HbStatus {
    if out.is_null() {
        return HbStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            // SAFETY: `out` is non-null and the caller guarantees it is valid for writes
            unsafe { out.write(v) };
            HbStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => HbStatus::Panic,
    }
}

fn handle<'a, T>(h: *const T) -> Result<&'a T, HbStatus> {
    // SAFETY: non-null handles come from the matching constructor
    unsafe { h.as_ref() }.ok_or(HbStatus::NullPointer)
}

/// Static, NUL-terminated description of a status code. Takes the raw
/// integer so unknown codes are safe to pass.
#[no_mangle]
pub extern "C" fn hb_status_message(status: i32) -> *const c_char {
    let s: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer argument\0",
        2 => b"non-finite coordinate\0",
        3 => b"invalid argument\0",
        4 => b"the two points coincide\0",
        5 => b"the vertices coincide\0",
        6 => b"characteristic point\0",
        7 => b"numerical failure\0",
        8 => b"internal error\0",
        _ => b"unknown status\0",
    };
    s.as_ptr().cast()
}

/// Korányi distance.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hb_dist(p1: HbPoint, p2: HbPoint, out: *mut f64) -> HbStatus {
    guarded(out, || Ok(dist_k(&point(p1)?, &point(p2)?)))
}

/// Cubic field of the Korányi bisector of `p1` and `p2`, negative at `p1`.
///
/// # Safety
/// `out` must be valid for writes. The handle written there must be released
/// with `hb_cubic_field_free`.
#[no_mangle]
pub unsafe extern "C" fn hb_bisector_field_new(p1: HbPoint, p2: HbPoint, out: *mut *mut HbCubicField) -> HbStatus {
    guarded(out, || {
        let f = bisector_field(&point(p1)?, &point(p2)?)?;
        Ok(Box::into_raw(Box::new(HbCubicField(f))))
    })
}

/// # Safety
/// `field` must be `NULL` or a handle from `hb_bisector_field_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hb_cubic_field_free(field: *mut HbCubicField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Value of the field at `p`.
///
/// # Safety
/// `field` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hb_cubic_field_residual(field: *const HbCubicField, p: HbPoint, out: *mut f64) -> HbStatus {
    guarded(out, || Ok(handle(field)?.0.residual(&point(p)?)))
}

/// Coefficient of `x^i y^j t^k`, zero above degree three.
///
/// # Safety
/// `field` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hb_cubic_field_coefficient(
    field: *const HbCubicField,
    i: u32,
    j: u32,
    k: u32,
    out: *mut f64,
) -> HbStatus {
    guarded(out, || {
        let f = handle(field)?;
        if i + j + k > 3 {
            return Ok(0.0);
        }
        Ok(f.0.coefficient(Monomial([i, j, k])))
    })
}

/// Horizontal mean curvature of the zero set of `field` at `p`.
///
/// # Safety
/// `field` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hb_mean_curvature(field: *const HbCubicField, p: HbPoint, out: *mut f64) -> HbStatus {
    guarded(out, || Ok(mean_curvature(&handle(field)?.0, &point(p)?)?))
}

/// Closed-form curvature of the cubic spinal sphere over `(x, y)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hb_s1_curvature(x: f64, y: f64, out: *mut f64) -> HbStatus {
    guarded(out, || {
        if !(x.is_finite() && y.is_finite()) {
            return Err(HbStatus::NonFinite);
        }
        Ok(s1_curvature(x, y)?)
    })
}

/// Similarity taking `(p1, p2)` to the canonical pair of its class.
/// `iota` receives the invariant of a generic pair, `0` for planar and
/// `INFINITY` for vertical pairs.
///
/// # Safety
/// All out-pointers must be valid for writes. The handle must be released
/// with `hb_similarity_free`.
#[no_mangle]
pub unsafe extern "C" fn hb_normalize_pair(
    p1: HbPoint,
    p2: HbPoint,
    out: *mut *mut HbSimilarity,
    class: *mut HbPairClass,
    iota: *mut f64,
) -> HbStatus {
    if class.is_null() || iota.is_null() {
        return HbStatus::NullPointer;
    }
    let mut meta = (HbPairClass::Vertical, f64::INFINITY);
    let status = guarded(out, || {
        let n = normalize_pair(&point(p1)?, &point(p2)?)?;
        meta = match n.class {
            PairClass::Vertical => (HbPairClass::Vertical, f64::INFINITY),
            PairClass::Planar => (HbPairClass::Planar, 0.0),
            PairClass::Generic { iota } => (HbPairClass::Generic, iota),
        };
        Ok(Box::into_raw(Box::new(HbSimilarity(n.similarity))))
    });
    if status == HbStatus::Ok {
        class.write(meta.0);
        iota.write(meta.1);
    }
    status
}

/// # Safety
/// `sim` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hb_similarity_apply(sim: *const HbSimilarity, p: HbPoint, out: *mut HbPoint) -> HbStatus {
    guarded(out, || {
        let q = handle(sim)?.0.apply(&point(p)?);
        Ok(HbPoint { x: q.x, y: q.y, t: q.t })
    })
}

/// # Safety
/// `sim` must be `NULL` or a handle from `hb_normalize_pair` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hb_similarity_free(sim: *mut HbSimilarity) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Spinal sphere with vertices `v1` and `v2`.
///
/// # Safety
/// `out` must be valid for writes. The handle must be released with
/// `hb_spinal_sphere_free`.
#[no_mangle]
pub unsafe extern "C" fn hb_spinal_sphere_new(
    v1: HbBoundaryPoint,
    v2: HbBoundaryPoint,
    out: *mut *mut HbSpinalSphere,
) -> HbStatus {
    guarded(out, || {
        let s = SpinalSphere::from_vertices(boundary(v1)?, boundary(v2)?)?;
        Ok(Box::into_raw(Box::new(HbSpinalSphere(s))))
    })
}

/// # Safety
/// `sphere` must be `NULL` or a handle from `hb_spinal_sphere_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hb_spinal_sphere_free(sphere: *mut HbSpinalSphere) {
    if !sphere.is_null() {
        drop(Box::from_raw(sphere));
    }
}

/// Signed membership residual of `b`; zero exactly on the sphere.
///
/// # Safety
/// `sphere` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hb_spinal_residual(
    sphere: *const HbSpinalSphere,
    b: HbBoundaryPoint,
    out: *mut f64,
) -> HbStatus {
    guarded(out, || Ok(handle(sphere)?.0.residual(&boundary(b)?)?))
}
