//! Floating-point abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumCast};

/// Real scalar the library computes with: `f32` or `f64`.
///
/// `Debug` formatting is used wherever text must round-trip exactly, so
/// implementors must print the shortest representation that parses back to
/// the same value (both primitive floats do).
pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Display + FromStr + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for types that cannot represent
    /// ordinary finite literals, which neither primitive float does.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::nan)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
