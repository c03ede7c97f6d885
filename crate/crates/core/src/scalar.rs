//! Scalar abstraction: the crate's numerics are generic over the real type.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real scalar type the whole crate is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + NumAssign + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for lifting an `f64` literal into the generic scalar.
#[inline]
pub fn r<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 is representable in the scalar type")
}
