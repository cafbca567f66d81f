//! Scalar abstraction shared by every numerical module.
//!
//! All linear algebra in this crate is written against [`Real`], which is
//! satisfied by `f32` and `f64`. The tolerances quoted throughout the docs
//! assume `f64`; `f32` instances work but reach only single-precision
//! accuracy.

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Floating-point scalar usable by the spectral and Gaussian machinery.
pub trait Real: RealField + Copy + ToPrimitive {}

impl<T> Real for T where T: RealField + Copy + ToPrimitive {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts a count or index into the working scalar.
#[inline]
pub fn from_usize<T: Real>(x: usize) -> T {
    nalgebra::convert(x as f64)
}

/// Lossy conversion to `f64`, used for error payloads and reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
