//! Floating-point abstraction for the numerical kernel.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};

/// Real scalar the transfer-function kernel is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Default relative tolerance for root cancellation at this precision.
    fn cancel_tol() -> Self;
}

impl Scalar for f32 {
    fn cancel_tol() -> Self {
        1e-4
    }
}

impl Scalar for f64 {
    fn cancel_tol() -> Self {
        1e-9
    }
}
