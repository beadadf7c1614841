//! Floating-point scalar abstraction.
//!
//! Everything numeric in this crate is generic over [`Real`], which is any
//! IEEE float with the conversions and constants we need. In practice that
//! means `f32` or `f64`; the crate root exports `f64` aliases for the common
//! case.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Scalar type for all real-valued computation (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + std::fmt::Debug + std::fmt::Display + 'static
{
    /// Shorthand for lossy conversion from an `f64` literal.
    ///
    /// Panics only if the target type cannot represent any nearby value,
    /// which cannot happen for finite literals and the supported types.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal converts to any supported scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}
