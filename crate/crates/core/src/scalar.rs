//! Scalar abstraction shared by every numerical routine in the crate.

use core::fmt::{Debug, Display};
use core::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Constants in the algorithms are written as `f64` literals and converted with
/// [`Real::lit`]; tolerances that only make sense in double precision are
/// scaled from [`Float::epsilon`] where possible.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + std::fmt::LowerExp
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum<Self>
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Convert a count or index into this scalar.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Lossy conversion to `f64` for reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(self, 0)`.
    #[inline]
    fn positive_part(self) -> Self {
        if self > Self::zero() {
            self
        } else {
            Self::zero()
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Relative difference `|a - b| / max(|a|, |b|)`; zero when both are zero.
pub fn rel_diff<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).abs() / scale
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
