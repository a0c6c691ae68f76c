//! Scalar abstraction for the analytic engine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar used by the analytic model: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the two supported types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// `ln(a + b)` given `ln a` and `ln b`; `-inf` stands for a zero operand.
    fn log_add_exp(a: Self, b: Self) -> Self {
        if a == Self::neg_infinity() {
            return b;
        }
        if b == Self::neg_infinity() {
            return a;
        }
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        hi + (lo - hi).exp().ln_1p()
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_exp_matches_direct_sum() {
        let got = f64::log_add_exp(2.0f64.ln(), 3.0f64.ln());
        assert!((got - 5.0f64.ln()).abs() < 1e-15);
        assert_eq!(f64::log_add_exp(f64::NEG_INFINITY, 1.5), 1.5);
        assert_eq!(f32::log_add_exp(0.5, f32::NEG_INFINITY), 0.5);
    }
}
