//! Exact rational numbers and their textual forms.
//!
//! Probabilities are written as `"num/den"` strings and coefficients of
//! information expressions may additionally be written as finite decimals.
//! Both parse into [`Rational`] without any rounding.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("exact rational required, got `{0}`")]
    NotExact(String),
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

fn parse_int(s: &str, whole: &str) -> Result<BigInt, RationalParseError> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(RationalParseError::Malformed(whole.to_string()));
    }
    s.parse::<BigInt>()
        .map_err(|_| RationalParseError::Malformed(whole.to_string()))
}

/// Parses `"n"` or `"n/d"`. Anything with a decimal point or exponent is
/// rejected as inexact.
pub fn parse_exact(text: &str) -> Result<Rational, RationalParseError> {
    let t = text.trim();
    if t.contains('.') || t.contains('e') || t.contains('E') {
        return Err(RationalParseError::NotExact(text.to_string()));
    }
    match t.split_once('/') {
        None => Ok(BigRational::from_integer(parse_int(t, text)?)),
        Some((n, d)) => {
            let num = parse_int(n.trim(), text)?;
            let den = parse_int(d.trim(), text)?;
            if den.is_zero() {
                return Err(RationalParseError::ZeroDenominator(text.to_string()));
            }
            Ok(BigRational::new(num, den))
        }
    }
}

/// Parses a finite decimal such as `"0.125"` or `"-3.5"` by exact expansion.
pub fn parse_decimal(text: &str) -> Result<Rational, RationalParseError> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty()
        || !whole.bytes().all(|b| b.is_ascii_digit())
        || !frac.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(RationalParseError::Malformed(text.to_string()));
    }
    let digits = format!("{whole}{frac}");
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits
            .parse()
            .map_err(|_| RationalParseError::Malformed(text.to_string()))?
    };
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Canonical text: `"n"` for integers, `"n/d"` otherwise.
pub fn format_exact(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator and denominator both beyond f64 range
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn is_nonneg(r: &Rational) -> bool {
    !r.is_negative()
}

/// Display adapter for exact rationals.
pub struct Exact<'a>(pub &'a Rational);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_exact(self.0))
    }
}

/// Serde adapter writing rationals as `"num/den"` strings.
pub mod serde_exact {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_exact(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_exact(&text).map_err(D::Error::custom)
    }
}
