//! Numeric plumbing: the exact rational type, decimal parsing, and the
//! [`Scalar`] trait that lets the verdict code run on either exact rationals
//! or `f64` (the Monte Carlo hot path).

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Q = BigRational;

pub fn q(numer: i64, denom: i64) -> Q {
    Q::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"3"`, `"-2/9"`, `"0.9"`, `"1e-3"` or `"-.25"` into an exact rational.
/// Decimals are read digit by digit, so `"0.9"` is exactly 9/10.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Q::from_integer(all);
    if scale >= 0 {
        value *= Q::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Q::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -value } else { value })
}

/// Comma-separated list of rationals.
pub fn parse_rational_list(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(parse_rational).collect()
}

/// Exact rational value of a finite binary float.
pub fn rationalize(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

/// Arithmetic the verdict code needs, implemented for exact rationals and
/// for `f64`.
pub trait Scalar: Clone + Debug + PartialOrd + Num {
    fn from_q(value: &Q) -> Self;
    fn to_f64(&self) -> f64;
    /// Equality used when validating that shares sum to one.
    fn unit_sum(&self) -> bool;
    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for Q {
    fn from_q(value: &Q) -> Self {
        value.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn unit_sum(&self) -> bool {
        self.is_one()
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

impl Scalar for f64 {
    fn from_q(value: &Q) -> Self {
        ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn unit_sum(&self) -> bool {
        (self - 1.0).abs() <= 1e-9
    }
}

pub(crate) fn sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v)
}

pub(crate) fn min_of<T: Scalar>(values: impl IntoIterator<Item = T>) -> Option<T> {
    values
        .into_iter()
        .fold(None, |acc: Option<T>, v| match acc {
            Some(a) if a <= v => Some(a),
            _ => Some(v),
        })
}
