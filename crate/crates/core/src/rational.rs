//! Exact rational numbers.
//!
//! All utilities, shares, weights and α-levels are [`Rational`]s, which are
//! `num`'s big rationals: always reduced, denominator positive.

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{FairError, Result};

pub type Rational = BigRational;

/// `numer / denom` as an exact rational. Panics if `denom == 0`.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Result of parsing a rational from text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedRational {
    pub value: Rational,
    /// False when the input was not already in lowest terms (e.g. `"2/6"`)
    /// or carried a redundant form such as `"4/1"` or `"+3"`.
    pub canonical: bool,
}

/// Parses `"p"` or `"p/q"` with `q > 0`.
pub fn parse_rational(text: &str) -> Result<ParsedRational> {
    let text = text.trim();
    let bad = || FairError::Parse(format!("not a rational: {text:?}"));
    let (numer, denom) = match text.split_once('/') {
        Some((n, d)) => (parse_int(n).ok_or_else(bad)?, parse_int(d).ok_or_else(bad)?),
        None => (parse_int(text).ok_or_else(bad)?, BigInt::one()),
    };
    if !denom.is_positive() {
        return Err(FairError::Parse(format!(
            "denominator must be positive in {text:?}"
        )));
    }
    let value = Rational::new(numer, denom);
    let canonical = format_rational(&value) == text;
    Ok(ParsedRational { value, canonical })
}

/// Parses a finite decimal such as `"0.25"`, `"-1.5"` or `"3e-2"` exactly.
pub fn parse_decimal(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || FairError::Parse(format!("not a decimal: {text:?}"));
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = text[pos + 1..].parse().map_err(|_| bad())?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits == "-" || digits == "+" || digits.is_empty() {
        return Err(bad());
    } else {
        digits
    };
    let numer = parse_int(&digits).ok_or_else(bad)?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

fn parse_int(text: &str) -> Option<BigInt> {
    let digits = text.strip_prefix(['-', '+']).unwrap_or(text);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

/// Rational approximation of a finite `f64` with denominator `denom`,
/// rounded to nearest. Only used to seed parameters that are certified
/// afterwards by exact computation.
pub fn approximate(value: f64, denom: u64) -> Rational {
    let scaled = (value * denom as f64).round();
    Rational::new(BigInt::from(scaled as i128), BigInt::from(denom))
}

pub fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}
