//! Scalar abstraction for cost units, probabilities and ROC coordinates.
//!
//! Everything that is a ratio or a cost is generic over [`Scalar`], so the
//! same code runs on `f64`, `f32` or exact rationals. Feature values stay
//! `f64` regardless.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Absolute tolerance used by [`Scalar::approx_eq`]. Zero for exact types.
    fn tolerance() -> Self;

    /// False for NaN and infinities.
    fn is_finite_value(self) -> bool;

    fn approx_eq(self, other: Self) -> bool {
        let diff = if self > other { self - other } else { other - self };
        diff <= Self::tolerance()
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn clamp_unit(self) -> Self {
        self.max_of(Self::zero()).min_of(Self::one())
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }

    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }

    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Ratio<i64> {
    fn tolerance() -> Self {
        Ratio::from_integer(0)
    }

    fn is_finite_value(self) -> bool {
        true
    }
}

impl Scalar for Ratio<i128> {
    fn tolerance() -> Self {
        Ratio::from_integer(0)
    }

    fn is_finite_value(self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_tolerance() {
        assert!(0.1f64.approx_eq(0.1 + 1e-12));
        assert!(!0.1f64.approx_eq(0.1 + 1e-6));
        assert!(!f64::NAN.is_finite_value());
    }

    #[test]
    fn rationals_compare_exactly() {
        let a = Ratio::new(1i64, 3);
        let b = Ratio::new(2i64, 6);
        assert!(a.approx_eq(b));
        assert!(!a.approx_eq(Ratio::new(333_333_333, 1_000_000_000)));
        assert_eq!(Ratio::<i64>::from_count(7), Ratio::from_integer(7));
        assert_eq!(Ratio::new(3i64, 2).clamp_unit(), Ratio::from_integer(1));
    }
}
