//! Scalar abstraction: every module is generic over the real field.
//!
//! `f64` is the working precision of the CLI and the acceptance suite;
//! `f32` instantiations compile and run but cannot honor the `f64`-scale
//! tolerances in [`crate::tol`].

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable in every numeric kernel of the toolkit.
pub trait Real: RealField + FromPrimitive + ToPrimitive + Copy + Send + Sync {}

impl<T> Real for T where T: RealField + FromPrimitive + ToPrimitive + Copy + Send + Sync {}

/// Embed an `f64` constant (tolerance, grid step, literal) into `T`.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must embed into the scalar type")
}

/// Lossy view of a `T` as `f64`, for diagnostics and reports.
#[inline]
pub fn approx_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
