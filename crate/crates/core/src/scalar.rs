use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssignOps};

/// Floating-point scalar used throughout the crate.
pub trait Scalar: Float + FloatConst + NumAssignOps + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: u64) -> Self {
        <Self as num_traits::NumCast>::from(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Clamp into the unit interval. NaN maps to 1 so that a broken
    /// evaluation never reads as a success probability.
    #[inline]
    fn clamp_unit(self) -> Self {
        if self.is_nan() {
            Self::one()
        } else {
            self.max(Self::zero()).min(Self::one())
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
