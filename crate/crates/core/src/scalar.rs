//! Scalar types usable as prices, price units and population probabilities.
//!
//! Everything in the market engine is written against [`Scalar`]. The exact
//! instantiation ([`crate::Rational`]) is what the linear-system bridge, the
//! exact predictor and the circuit compiler use; `f64`/`f32` are supported for
//! quick simulations where exactness does not matter.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// A signed field-like number type.
pub trait Scalar:
    Clone + PartialOrd + Debug + Display + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync
{
    /// `true` when arithmetic on this type is exact.
    const EXACT: bool;

    /// Whether `value` equals one, up to rounding for inexact types.
    fn is_unit(value: &Self) -> bool {
        *value == Self::one()
    }

    /// Returns `Some(n)` when `value` is exactly the integer `n`.
    fn exact_integer(value: &Self) -> Option<i64> {
        let n = value.to_i64()?;
        (Self::from_i64(n)? == *value).then_some(n)
    }

    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("every i64 is representable")
    }
}

macro_rules! impl_float_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            const EXACT: bool = false;

            fn is_unit(value: &Self) -> bool {
                (*value - 1.0).abs() <= 64.0 * <$f>::EPSILON
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn exact_integer(value: &Self) -> Option<i64> {
        if value.is_integer() {
            value.to_integer().to_i64()
        } else {
            None
        }
    }
}

impl Scalar for Ratio<i64> {
    const EXACT: bool = true;

    fn exact_integer(value: &Self) -> Option<i64> {
        value.is_integer().then(|| value.to_integer())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as an exact rational")]
pub struct ParseRationalError(pub String);

/// Parses `"3"`, `"-0.25"`, `"1/4"` or `"1.5e-2"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&all_digits).map_err(|_| err())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Canonical text form: an integer or a reduced `p/q` fraction.
pub fn format_rational(value: &BigRational) -> String {
    value.to_string()
}

pub(crate) fn sign_of<T: Scalar>(value: &T) -> i64 {
    if value.is_positive() {
        1
    } else if value.is_negative() {
        -1
    } else {
        0
    }
}

pub(crate) fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
