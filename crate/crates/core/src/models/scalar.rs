use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, ToPrimitive};

/// Number type for the closed-form models: floats, or exact rationals.
pub trait Scalar: Num + Clone + PartialOrd + Debug {
    /// `num / den` in this type.
    fn from_fraction(num: i64, den: i64) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_fraction(n, 1)
    }

    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_fraction(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_fraction(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for Ratio<i64> {
    fn from_fraction(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).expect("finite ratio")
    }
}

/// Parses a decimal literal such as `"38.4"` into an exact value.
pub fn decimal<S: Scalar>(text: &str) -> Option<S> {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    let digits = format!("{int}{frac}");
    let num: i64 = digits.parse().ok()?;
    let den = 10i64.checked_pow(frac.len() as u32)?;
    Some(S::from_fraction(num, den))
}
