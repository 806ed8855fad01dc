//! Text form of exact rationals.
//!
//! Integral values print as integers and everything else as the shortest
//! decimal that round-trips through `f64`. Parsing is exact: `0.1` is 1/10.

use sysolve_core::rational::to_f64;
use sysolve_core::Rational;

use crate::error::{Error, Result};

pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format_f64(to_f64(value))
    }
}

pub fn format_f64(value: f64) -> String {
    format!("{value}")
}

/// Accepts integers, `a/b`, and decimals with an optional exponent.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::Number(text.to_string());
    let s = text.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i128 = num.trim().parse().map_err(|_| bad())?;
        let den: i128 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }

    let mut numer: i128 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        numer = numer
            .checked_mul(10)
            .and_then(|v| v.checked_add(i128::from(b - b'0')))
            .ok_or_else(bad)?;
    }
    let scale = exponent - frac_part.len() as i32;
    let pow = |e: u32| 10i128.checked_pow(e).ok_or_else(bad);
    let value = if scale >= 0 {
        Rational::from_integer(numer.checked_mul(pow(scale as u32)?).ok_or_else(bad)?)
    } else {
        Rational::new(numer, pow(scale.unsigned_abs())?)
    };
    Ok(if negative { -value } else { value })
}

pub fn parse_u64(text: &str) -> Result<u64> {
    text.trim()
        .parse()
        .map_err(|_| Error::Number(text.to_string()))
}

pub fn parse_f64(text: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| Error::Number(text.to_string()))
}
