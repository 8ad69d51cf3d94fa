use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};

/// Real scalar used for probabilities, values and rates: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance for normalization checks at this precision.
    fn tolerance() -> Self;

    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize converts to a float")
    }

    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 converts to a float")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("float converts to f64")
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-12
    }
}

/// Exact decimal quantity (prices, volumes, increments).
pub type Exact = num_rational::Ratio<i128>;

/// Converts an exact rational to the nearest scalar. Nonzero values keep their sign.
pub fn exact_to_scalar<T: Scalar>(x: &Exact) -> T {
    let approx = x.to_f64().unwrap_or_else(|| {
        // Ratio<i128>::to_f64 only fails on pathological magnitudes.
        *x.numer() as f64 / *x.denom() as f64
    });
    T::from_f64_lossy(approx)
}
