//! Normal approximation bounds for vector-valued functionals of i.i.d. inputs.
//!
//! The crate estimates the ingredients of multivariate Berry-Esseen bounds
//! built from coordinate-resampling difference operators, and applies them to
//! intrinsic volumes of Boolean models and to k-nearest-neighbour statistics.

pub mod boolean;
pub mod bounds;
pub mod distance;
pub mod error;
pub mod functionals;
pub mod harness;
pub mod limiting;
pub mod linalg;
pub mod locdep;
pub mod normal;
pub mod resample;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
