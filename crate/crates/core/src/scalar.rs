//! Floating-point abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used for probabilities, discounted counts and bounds.
///
/// Implemented for `f32` and `f64`. The estimators take square roots and
/// logarithms, so exact/rational scalars are not supported.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal; infallible for the supported float types.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts an integer count.
    fn of_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    fn half() -> Self {
        Self::of(0.5)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
