//! Floating-point scalar abstraction for all numerics in this crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar type the whole library is generic over: `f32` or `f64`.
///
/// Everything here is plain field arithmetic plus `powf`/`exp`/`ln`/trig,
/// so any IEEE float works; `f64` is the intended precision for the
/// default tolerances.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn cast<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 constant converts to scalar type")
}
