//! Geometry of Korányi bisectors in the first Heisenberg group.

// `!(a < b)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bisector;
pub mod curvature;
pub mod mesh;
pub mod boundary;
pub mod error;
pub mod heis;
pub mod io;
pub mod poly;
pub mod similarity;
pub mod simplex;
pub mod spinal;
pub mod verify;

pub use error::{Error, Result};
pub use heis::HeisPoint;
