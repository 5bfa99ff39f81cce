//! Exact rational numbers and their textual forms.
//!
//! Everything in the engine is computed over [`Rational`] (arbitrary precision
//! numerator and denominator). Text input accepts integers, decimal literals
//! (`0.25`, `-1.5e-2`) and fractions (`3/4`); text output always uses the
//! canonical `p/q` form (or `p` for integers).

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as an exact rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

fn parse_err(input: &str, reason: &'static str) -> ParseRationalError {
    ParseRationalError {
        input: input.to_string(),
        reason,
    }
}

/// Builds `num / den`. Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `base^exp` for any integer exponent (negative exponents invert).
pub fn pow(base: &Rational, exp: i32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp.unsigned_abs() {
        acc *= base;
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Parses an integer, a decimal literal or a `p/q` fraction exactly.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(parse_err(input, "empty string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_decimal(num.trim()).ok_or_else(|| parse_err(input, "bad numerator"))?;
        let den = parse_decimal(den.trim()).ok_or_else(|| parse_err(input, "bad denominator"))?;
        if den.is_zero() {
            return Err(parse_err(input, "zero denominator"));
        }
        return Ok(num / den);
    }
    parse_decimal(s).ok_or_else(|| parse_err(input, "not a number"))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(idx) => (&s[..idx], s[idx + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let numer: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().ok()?
    };
    let scale = exponent - i32::try_from(frac_part.len()).ok()?;
    let mut value = Rational::from_integer(numer) * pow(&int(10), scale);
    if negative {
        value = -value;
    }
    Some(value)
}

/// Canonical exact text form: `p/q`, or `p` when the value is an integer.
pub fn to_exact_string(r: &Rational) -> String {
    r.to_string()
}

/// Decimal rendering rounded to `digits` fractional digits. Display only.
pub fn to_decimal_string(r: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = r * Rational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let negative = rounded.is_negative();
    let abs = rounded.abs();
    let int_part = &abs / &scale;
    let frac_part = &abs % &scale;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    let _ = write!(out, "{int_part}");
    if digits > 0 {
        let _ = write!(out, ".{:0>width$}", frac_part.to_string(), width = digits);
    }
    out
}

/// Lossy conversion, for logging and plotting only.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Dot product of two equally long rational slices.
pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub mod serde_exact {
    //! Serde adapters that store rationals as exact strings.
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_exact_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        from_json(&value).map_err(de::Error::custom)
    }

    /// Accepts a JSON number (kept exact through its literal) or a string.
    pub fn from_json(value: &serde_json::Value) -> Result<Rational, ParseRationalError> {
        match value {
            serde_json::Value::Number(n) => parse_rational(&n.to_string()),
            serde_json::Value::String(s) => parse_rational(s),
            other => Err(ParseRationalError {
                input: other.to_string(),
                reason: "expected a number or a string",
            }),
        }
    }
}
