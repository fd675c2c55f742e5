//! Scalar abstraction for the numeric recognizers.
//!
//! All regression, autocorrelation and conic-fitting kernels are generic
//! over [`Real`] so they run on `f32` or `f64`. The detection engine and
//! the codec work in exact integer bits and are not generic.

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + NumAssign + std::fmt::Debug + 'static {
    /// Lossy conversion to `f64` for reporting.
    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Convert a `usize` into a scalar, saturating on overflow.
pub fn from_usize<R: Real>(n: usize) -> R {
    R::from_usize(n).unwrap_or_else(R::max_value)
}
