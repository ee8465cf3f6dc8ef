//! Floating-point abstraction for the analytic core.
//!
//! The contour algebra, width extraction, and regression code are generic
//! over the scalar so they can run in `f32` or `f64`; the matrix pipeline
//! instantiates everything at [`crate::Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Scalar bound for the analytic modules: `f32` or `f64`.
pub trait Float:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("finite scalar")
    }
}

impl Float for f32 {}
impl Float for f64 {}
