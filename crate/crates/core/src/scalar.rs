//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// Floating point scalar: `f32` or `f64`.
///
/// All geometry, jet and solver code is written against this trait. The
/// tolerances quoted throughout the documentation are calibrated for `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumCast + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 literal representable")
    }

    /// Conversion from a count or index.
    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }

    /// Sentinel used for an infinite injectivity radius.
    #[inline]
    fn infinite_radius() -> Self {
        Self::max_value()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `sin(t)/t`, accurate near zero.
pub(crate) fn sinc<T: Real>(t: T) -> T {
    if t.abs() < T::lit(1e-4) {
        let t2 = t * t;
        T::one() - t2 / T::lit(6.0) + t2 * t2 / T::lit(120.0)
    } else {
        t.sin() / t
    }
}

/// `sinh(t)/t`, accurate near zero.
pub(crate) fn sinhc<T: Real>(t: T) -> T {
    if t.abs() < T::lit(1e-4) {
        let t2 = t * t;
        T::one() + t2 / T::lit(6.0) + t2 * t2 / T::lit(120.0)
    } else {
        t.sinh() / t
    }
}
