//! Exact rational numbers and their textual forms.
//!
//! Accepted syntax: an optionally signed integer or decimal with an optional
//! exponent (`3`, `-0.25`, `1.5e-3`), or a fraction `p/q` of two integers.
//! Decimal strings convert exactly, so `0.1` is `1/10`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

const MAX_LITERAL_LEN: usize = 512;
const MAX_EXPONENT: i64 = 400;
/// Largest denominator accepted when converting a binary float.
pub const MAX_FLOAT_DENOMINATOR_BITS: u32 = 32;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact conversion of a finite `f64`.
///
/// Rejects non-finite values and values whose dyadic denominator exceeds
/// `2^32`, since those almost always come from an inexact decimal literal.
pub fn from_f64(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("{x} is not finite")));
    }
    let r = Rational::from_float(x)
        .ok_or_else(|| Error::InvalidInput(format!("{x} is not representable")))?;
    let bits = r.denom().bits();
    if bits > u64::from(MAX_FLOAT_DENOMINATOR_BITS) + 1 {
        return Err(Error::InvalidInput(format!(
            "{x} is not exactly representable with denominator <= 2^{MAX_FLOAT_DENOMINATOR_BITS}"
        )));
    }
    Ok(r)
}

fn parse_int(s: &str) -> Result<BigInt> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("'{s}' is not an integer")));
    }
    s.trim_start_matches('+')
        .parse::<BigInt>()
        .map_err(|e| Error::Parse(format!("'{s}': {e}")))
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e = &s[i + 1..];
            let e_digits = e.strip_prefix(['+', '-']).unwrap_or(e);
            if e_digits.is_empty() || e_digits.len() > 6 || !e_digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::Parse(format!("'{s}' has a malformed exponent")));
            }
            let v: i64 = e
                .trim_start_matches('+')
                .parse()
                .map_err(|_| Error::Parse(format!("'{s}' has a malformed exponent")))?;
            (&s[..i], v)
        }
        None => (s, 0),
    };
    if exponent.abs() > MAX_EXPONENT {
        return Err(Error::Parse(format!("'{s}': exponent out of range")));
    }
    let (negative, body) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("'{s}' is not a number")));
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("'{s}' is not a number")));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| Error::Parse(format!("'{s}' is not a number")))?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Parses a single rational literal.
pub fn parse_rational(input: &str) -> Result<Rational> {
    let s = input.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if s.len() > MAX_LITERAL_LEN {
        return Err(Error::Parse("number literal too long".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_int(p.trim())?;
        let q = parse_int(q.trim())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("'{s}' has a zero denominator")));
        }
        return Ok(Rational::new(p, q));
    }
    parse_decimal(s)
}

/// Parses a comma-separated list such as `0,3/2,3/2`.
pub fn parse_rational_list(input: &str) -> Result<Vec<Rational>> {
    let s = input.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty list".into()));
    }
    s.split(',').map(parse_rational).collect()
}

/// Canonical text: integers print bare, everything else as `p/q`.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn floor_to_i64(q: &Rational) -> Option<i64> {
    q.floor().to_integer().to_i64()
}

pub fn ceil_to_i64(q: &Rational) -> Option<i64> {
    q.ceil().to_integer().to_i64()
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub fn pow(q: &Rational, e: u32) -> Rational {
    num_traits::pow(q.clone(), e as usize)
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}
