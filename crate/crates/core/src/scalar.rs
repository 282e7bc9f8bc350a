//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point type the solvers are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Infallible for the supported types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `x - sin(x) - x^3/6`, evaluated without cancellation for small `|x|`.
pub fn sine_remainder<T: Scalar>(x: T) -> T {
    if x.abs() < T::one() {
        // -sum_{m>=2} (-1)^m x^(2m+1) / (2m+1)!
        let x2 = x * x;
        let mut term = x2 * x2 * x / T::lit(120.0);
        let mut sum = -term;
        let mut m = 2usize;
        loop {
            let a = T::from_usize_lossy(2 * m + 2);
            let b = T::from_usize_lossy(2 * m + 3);
            term = -term * x2 / (a * b);
            sum = sum - term;
            m += 1;
            if term.abs() <= T::epsilon() * sum.abs() || m > 30 {
                break;
            }
        }
        sum
    } else {
        x - x.sin() - x * x * x / T::lit(6.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_remainder_matches_direct_formula_away_from_zero() {
        for &x in &[0.9f64, 1.0, 1.5, -2.0, 3.0] {
            let direct = x - x.sin() - x * x * x / 6.0;
            assert!((sine_remainder(x) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn sine_remainder_leading_term() {
        let x = 1e-3f64;
        let r = sine_remainder(x);
        let lead = -x.powi(5) / 120.0 + x.powi(7) / 5040.0;
        assert!(((r - lead) / lead).abs() < 1e-12);
        assert_eq!(sine_remainder(0.0f64), 0.0);
        assert_eq!(sine_remainder(-x), -r);
    }

    #[test]
    fn sine_remainder_is_continuous_at_switch() {
        let x = 1.0f64 - 1e-12;
        let below = sine_remainder(x);
        let above = x - x.sin() - x * x * x / 6.0;
        assert!((below - above).abs() < 1e-14);
    }
}
