//! Scalar abstraction for edge weights, strengths and modularity values.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};

/// Floating-point type usable as a monetary edge weight (`f32` or `f64`).
pub trait Weight:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts from `f64`, saturating to the nearest representable value.
    fn of(value: f64) -> Self {
        <Self as NumCast>::from(value).unwrap_or_else(Self::nan)
    }

    /// Widens to `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance under which two accumulated sums are considered tied.
    fn tie_tolerance() -> Self {
        Self::epsilon() * Self::of(1024.0)
    }

    /// `true` when `self` exceeds `other` by more than accumulated rounding noise.
    fn definitely_gt(self, other: Self) -> bool {
        let scale = self.abs().max(other.abs());
        self - other > Self::tie_tolerance() * scale
    }

    /// `true` when the two values agree up to accumulated rounding noise.
    fn roughly_eq(self, other: Self) -> bool {
        !self.definitely_gt(other) && !other.definitely_gt(self)
    }
}

impl Weight for f32 {}
impl Weight for f64 {}
