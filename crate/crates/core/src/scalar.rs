//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;

/// Floating point type the library is generic over. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + FftNum
    + Sum
    + for<'a> Sum<&'a Self>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Converts an `f64` constant. Never fails for finite input.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    /// Maps a value from `(0,1)` computed in `f64` into the open unit interval of `Self`,
    /// so that rounding to a narrower type never produces exactly `0` or `1`.
    #[inline]
    fn open_unit(u: f64) -> Self {
        let v = Self::c(u);
        if v >= Self::one() {
            Self::one() - Self::epsilon() / (Self::one() + Self::one())
        } else if v <= Self::zero() {
            Self::min_positive_value()
        } else {
            v
        }
    }

    /// Lossy conversion used for diagnostics and error payloads.
    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Real for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}
