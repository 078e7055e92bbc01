//! Exact rational scalars and the extended value `+∞` used by separation
//! and bad-regret infima.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational, always in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Point or direction with rational coordinates.
pub type Point = Vec<Rational>;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn point(coords: &[(i64, i64)]) -> Point {
    coords.iter().map(|&(n, d)| ratio(n, d)).collect()
}

pub fn int_point(coords: &[i64]) -> Point {
    coords.iter().map(|&n| int(n)).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn linf_norm(v: &[Rational]) -> Rational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Rational], k: &Rational) -> Point {
    a.iter().map(|x| x * k).collect()
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float into a rational.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Canonical `num/den` text form, `num` alone when the denominator is one.
pub fn format_rational(x: &Rational) -> String {
    use alloc::string::ToString;
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        alloc::format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError {
    pub input: String,
}

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "`{}` is not a rational of the form -?[0-9]+(/[1-9][0-9]*)?",
            self.input
        )
    }
}

impl core::error::Error for ParseRationalError {}

/// Parses the grammar `-?[0-9]+(/[1-9][0-9]*)?`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        input: String::from(text),
    };
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let digits = num.strip_prefix('-').unwrap_or(num);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let numer = BigInt::from_str(num).map_err(|_| err())?;
    let denom = match den {
        None => BigInt::one(),
        Some(d) => {
            let mut bytes = d.bytes();
            match bytes.next() {
                Some(b'1'..=b'9') => {}
                _ => return Err(err()),
            }
            if !bytes.all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            BigInt::from_str(d).map_err(|_| err())?
        }
    };
    Ok(Rational::new(numer, denom))
}

/// A rational or `+∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Extended {
    Finite(Rational),
    Infinite,
}

impl Extended {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    pub fn min(self, other: Extended) -> Extended {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Extended::Finite(x) => to_f64(x),
            Extended::Infinite => f64::INFINITY,
        }
    }
}

impl From<Rational> for Extended {
    fn from(x: Rational) -> Self {
        Extended::Finite(x)
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Extended {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.cmp(b),
            (Extended::Finite(_), Extended::Infinite) => Ordering::Less,
            (Extended::Infinite, Extended::Finite(_)) => Ordering::Greater,
            (Extended::Infinite, Extended::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => f.write_str(&format_rational(x)),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("-1/2").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("4/8").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("007").unwrap(), int(7));
        for bad in ["", "-", "1/0", "1/02", "+1", "1.5", "1/-2", "a", "1/", "/2", "--1"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn canonical_text() {
        assert_eq!(format_rational(&ratio(6, -4)), "-3/2");
        assert_eq!(format_rational(&int(0)), "0");
        assert_eq!(format_rational(&ratio(10, 5)), "2");
    }

    #[test]
    fn extended_order() {
        let a = Extended::Finite(int(5));
        assert!(a < Extended::Infinite);
        assert_eq!(a.clone().min(Extended::Infinite), a);
        assert_eq!(alloc::format!("{}", Extended::Infinite), "inf");
    }
}
