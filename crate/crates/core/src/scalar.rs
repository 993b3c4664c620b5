//! Scalar abstraction shared by the converter, plant and control math.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};

/// Floating-point type the models are generic over (`f32` or `f64`).
pub trait Scalar:
    'static + Copy + Send + Sync + Float + FloatConst + NumAssign + FromPrimitive + Default + Debug + Display + LowerExp
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        // f64 -> f32/f64 never fails; it rounds or is exact
        Self::from_f64(x).unwrap()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for [`Scalar::lit`] inside generic code.
#[inline]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::lit(x)
}

/// 2π/3, the phase displacement of a balanced three-phase set.
#[inline]
pub(crate) fn third_turn<T: Scalar>() -> T {
    T::PI() * lit(2.0 / 3.0)
}
