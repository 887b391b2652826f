//! Scalar abstraction: all model math is generic over an IEEE-style real type.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar the model computes with. `f32` and `f64` both
/// qualify; tests and the CLI use `f64`.
pub trait Real: Float + FromPrimitive + NumAssign + Debug + Display + Copy + 'static {}

impl<T> Real for T where T: Float + FromPrimitive + NumAssign + Debug + Display + Copy + 'static {}

/// Converts an `f64` literal into the working scalar type.
pub(crate) fn lit<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 literal must be representable")
}

/// Exact small rational, e.g. `frac(1, 6)`.
pub(crate) fn frac<R: Real>(num: i32, den: i32) -> R {
    R::from_i32(num).unwrap() / R::from_i32(den).unwrap()
}
