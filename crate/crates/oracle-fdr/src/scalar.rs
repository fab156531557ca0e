//! Scalar abstraction for the numeric core.
//!
//! Everything downstream of sampling is ordinary floating-point math, so the
//! kernels are generic over the scalar type. `f64` is what the harness and
//! CLI use; `f32` works for the same code at its own precision.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by every kernel in this crate.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum<Self> + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, for literals and counts.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    /// Conversion from a length or index.
    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize fits in scalar")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Sum<T> + Debug + Display + Send + Sync + 'static
{
}
