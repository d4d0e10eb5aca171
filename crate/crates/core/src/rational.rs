//! Exact rational scores.
//!
//! Every score, weight and aggregate in this crate is a [`Rational`]. Inputs
//! may be written as integers (`3`), decimals (`0.34`, `-1.5e-3`) or fractions
//! (`7/20`); output prefers a terminating decimal and falls back to `p/q`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses an integer, decimal (with optional exponent) or `p/q` literal.
pub fn parse(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not an exact number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse(num)?;
        let d = parse(den)?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(n / d);
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{whole}{frac}");
    let numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Converts a float through its decimal expansion at `digits` significant
/// places. Used when simulated scores enter the exact axiom checks.
pub fn from_f64(value: f64, digits: usize) -> Result<Rational> {
    if !value.is_finite() {
        return Err(Error::Parse(format!("non-finite score {value}")));
    }
    let text = format!("{:.*e}", digits.saturating_sub(1), value);
    parse(&text)
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// True when the denominator has no prime factors other than 2 and 5.
fn terminates(value: &Rational) -> bool {
    let mut d = value.denom().clone();
    for p in [2u32, 5] {
        let p = BigInt::from(p);
        while (&d % &p).is_zero() {
            d /= &p;
        }
    }
    d.is_one()
}

/// Exact textual form: integer, terminating decimal, or `p/q`.
pub fn format(value: &Rational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    if !terminates(value) {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let mut places = 0usize;
    let mut scaled = value.clone();
    let ten = int(10);
    while !scaled.is_integer() {
        scaled *= &ten;
        places += 1;
    }
    decimal_string(scaled.numer(), places)
}

fn decimal_string(scaled: &BigInt, places: usize) -> String {
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let padded = if digits.len() <= places {
        format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
    } else {
        digits
    };
    let split = padded.len() - places;
    let body = if places == 0 {
        padded
    } else {
        format!("{}.{}", &padded[..split], &padded[split..])
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Rounds half away from zero to `places` decimals and prints every place.
pub fn round_decimal(value: &Rational, places: usize) -> String {
    let factor = Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let scaled = value * factor;
    let half = ratio(1, 2);
    let rounded = if scaled.is_negative() {
        -((-scaled + half).floor())
    } else {
        (scaled + half).floor()
    };
    decimal_string(&rounded.to_integer(), places)
}

/// Least common multiple of the denominators, handy for integer-scaled output.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}
