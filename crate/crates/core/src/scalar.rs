use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the sampler is written against: `f32` or `f64`.
///
/// Random variates are always generated in `f64` and narrowed with
/// [`Scalar::of`]; everything downstream of the draw stays in `Self`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or draw.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar is representable as f64")
    }

    /// Smallest value accepted for a sampled variance-like quantity.
    fn variance_floor() -> Self {
        Self::of(1e-300).max(Self::min_positive_value())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
