//! Floating-point scalar abstraction for the rate computations.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the toolkit is generic over: `f32` or `f64`.
///
/// Everything downstream (constellations, noise, estimators, quadrature)
/// is parameterised on this trait so the same code drives single- and
/// double-precision runs. The acceptance tolerances are only meaningful
/// in `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
}

impl<S> Scalar for S where
    S: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + std::fmt::Debug
        + std::fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for lowering an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 constant must convert")
}
