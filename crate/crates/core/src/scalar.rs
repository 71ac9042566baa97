//! Scalar abstraction: the crate's numerics are generic over the real field.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar for all numerics in this crate: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Default {}

/// Infallible conversion from an `f64` constant (lossy for `f32`).
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Conversion from a count.
#[inline]
pub fn real_of_usize<T: Real>(n: usize) -> T {
    nalgebra::convert(n as f64)
}

/// Back to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("real scalar converts to f64")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_both_precisions() {
        assert_eq!(real::<f64>(0.25), 0.25);
        assert_eq!(real::<f32>(0.25), 0.25f32);
        assert_eq!(to_f64(real::<f32>(1.5)), 1.5);
        assert_eq!(real_of_usize::<f64>(7), 7.0);
    }
}
