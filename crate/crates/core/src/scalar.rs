//! Scalar abstraction for the count.
//!
//! Every quantity the engine manipulates (support, seat loads, priorities,
//! quotas) is a value of some [`Scalar`]. Only exact types implement it: the
//! count compares priorities for equality to detect ties, so a rounding error
//! would change outcomes.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};
use std::fmt::{Debug, Display};

/// Exact ordered field element usable as the count's number type.
///
/// Implemented for [`Ratio<T>`] over any primitive or big integer. Fixed-width
/// ratios (`Ratio<i64>`, `Ratio<i128>`) are faster but panic on overflow; the
/// crate-root [`Rational`](crate::Rational) alias uses arbitrary precision.
pub trait Scalar: Clone + Ord + Debug + Send + Sync + Num {
    /// Converts an integer ballot weight or seat count.
    fn from_u64(value: u64) -> Self;

    /// Renders as `"num/den"` in lowest terms, denominator always present.
    fn to_exact_string(&self) -> String;

    /// Approximate value, for display only.
    fn to_f64(&self) -> f64;

    /// Renders with at most `digits` fractional digits, rounding half away
    /// from zero. The flag is true when the rendering is not exact.
    fn to_decimal(&self, digits: u32) -> (String, bool);
}

impl<I> Scalar for Ratio<I>
where
    I: Integer + Clone + Debug + Display + Send + Sync + FromPrimitive + ToPrimitive,
{
    fn from_u64(value: u64) -> Self {
        Ratio::from_integer(I::from_u64(value).expect("integer type too narrow for ballot weight"))
    }

    fn to_exact_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn to_f64(&self) -> f64 {
        self.numer().to_f64().unwrap_or(f64::NAN) / self.denom().to_f64().unwrap_or(f64::NAN)
    }

    fn to_decimal(&self, digits: u32) -> (String, bool) {
        let ten = I::from_u8(10).expect("integer type cannot hold 10");
        let mut scale = I::one();
        for _ in 0..digits {
            scale = scale * ten.clone();
        }
        let negative = self.numer() < &I::zero();
        let numer = if negative {
            I::zero() - self.numer().clone()
        } else {
            self.numer().clone()
        };
        let scaled = numer * scale.clone();
        let (quot, rem) = scaled.div_rem(self.denom());
        let inexact = !rem.is_zero();
        // round half away from zero
        let two = I::one() + I::one();
        let quot = if rem.clone() * two >= *self.denom() {
            quot + I::one()
        } else {
            quot
        };
        let (int_part, mut frac) = quot.div_rem(&scale);
        let mut width = digits as usize;
        while width > 0 && !frac.is_zero() && frac.is_multiple_of(&ten) {
            frac = frac / ten.clone();
            width -= 1;
        }
        let sign = if negative && !(int_part.is_zero() && frac.is_zero()) {
            "-"
        } else {
            ""
        };
        let text = if frac.is_zero() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac:0>width$}", frac = frac.to_string())
        };
        (text, inexact)
    }
}
