//! Dual-mode scalar arithmetic.
//!
//! Every quantity in the game (job sizes, the slowdown factor, loads,
//! ratios) is a [`Scalar`]: either an exact `BigRational` or an `f64`,
//! with the representation recorded. Arithmetic between exact values
//! stays exact; as soon as a float enters a computation the result is a
//! float. This lets equilibrium checks on rational inputs be decided by
//! exact comparisons while irrational parameters (breakpoints, the
//! golden ratio) flow through the same code paths in double precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Relative tolerance used for float-mode comparisons where exact mode
/// would compare exactly (strict improvements, verification equalities).
pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// An exact rational or a double-precision real.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseScalarError {
    #[error("empty value")]
    Empty,
    #[error("invalid rational `{0}`: expected `p/q`, an integer, or a decimal")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact rational p/q. Panics if `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Scalar::Exact(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(v) => *v,
        }
    }

    /// The value as an exact rational. Floats convert losslessly (every
    /// finite `f64` is a dyadic rational).
    pub fn to_rational(&self) -> BigRational {
        match self {
            Scalar::Exact(r) => r.clone(),
            Scalar::Float(v) => {
                BigRational::from_f64(*v).expect("finite float converts to rational")
            }
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(v) => *v == 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_negative(),
            Scalar::Float(v) => *v < 0.0,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(v) => Scalar::Float(v.abs()),
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Equality up to `rel` relative tolerance when either side is a
    /// float; exact equality when both sides are exact.
    pub fn approx_eq(&self, other: &Scalar, rel: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                (a - b).abs() <= rel * 1f64.max(a.abs()).max(b.abs())
            }
        }
    }

    /// Strictly-less in the mode-appropriate sense: exact `<` for two
    /// exact values, otherwise a margin of `rel` relative tolerance is
    /// required (near-ties do not count as improvements).
    pub fn strictly_less(&self, other: &Scalar, rel: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a < b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                b - a > rel * 1f64.max(a.abs()).max(b.abs())
            }
        }
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::Exact(r)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Float(v)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

/// Parses `"p/q"`, an integer, or a decimal (optionally with exponent,
/// e.g. `1.25e-3`) into an exact rational scalar.
impl FromStr for Scalar {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseScalarError::Empty);
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p
                .trim()
                .parse()
                .map_err(|_| ParseScalarError::Invalid(s.to_string()))?;
            let q: BigInt = q
                .trim()
                .parse()
                .map_err(|_| ParseScalarError::Invalid(s.to_string()))?;
            if q.is_zero() {
                return Err(ParseScalarError::ZeroDenominator(s.to_string()));
            }
            return Ok(Scalar::Exact(BigRational::new(p, q)));
        }
        parse_decimal(s).ok_or_else(|| ParseScalarError::Invalid(s.to_string()))
    }
}

/// Exact decimal parsing: `-12.345e-2` becomes -12345/100000 scaled by
/// the exponent, with no round trip through floating point.
fn parse_decimal(s: &str) -> Option<Scalar> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let numer: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().ok()?
    };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let rational = if scale >= 0 {
        BigRational::from_integer(numer * ten.pow(scale as u32))
    } else {
        BigRational::new(numer, ten.pow((-scale) as u32))
    };
    Some(Scalar::Exact(rational * BigRational::from_integer(BigInt::from(sign))))
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Float(v) => write!(f, "{v}"),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.$method(b)),
                    (a, b) => Scalar::Float(a.to_f64().$method(b.to_f64())),
                }
            }
        }

        impl $trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.$method(b)),
                    (a, b) => Scalar::Float(a.to_f64().$method(b.to_f64())),
                }
            }
        }
    };
}

scalar_binop!(Add, add);
scalar_binop!(Sub, sub);
scalar_binop!(Mul, mul);
scalar_binop!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(v) => Scalar::Float(-v),
        }
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, v| acc + v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Scalar::ratio(1, 3);
        let b = Scalar::ratio(1, 6);
        let sum = &a + &b;
        assert!(sum.is_exact());
        assert_eq!(sum, Scalar::ratio(1, 2));
    }

    #[test]
    fn float_contaminates() {
        let a = Scalar::ratio(1, 3);
        let b = Scalar::Float(0.5);
        assert!(!(&a + &b).is_exact());
        assert!(!(&a * &b).is_exact());
    }

    #[test]
    fn exact_comparison_is_exact() {
        // 1/3 differs from its f64 approximation at ~1e-17; exact mode sees it.
        let third = Scalar::ratio(1, 3);
        let nearly: Scalar = "0.3333333333333333".parse().unwrap();
        assert!(nearly < third);
        assert_ne!(nearly, third);
    }

    #[test]
    fn parse_forms() {
        assert_eq!("17/10".parse::<Scalar>().unwrap(), Scalar::ratio(17, 10));
        assert_eq!("-3/9".parse::<Scalar>().unwrap(), Scalar::ratio(-1, 3));
        assert_eq!("2".parse::<Scalar>().unwrap(), Scalar::from_int(2));
        assert_eq!("1.25".parse::<Scalar>().unwrap(), Scalar::ratio(5, 4));
        assert_eq!("12.5e-2".parse::<Scalar>().unwrap(), Scalar::ratio(1, 8));
        assert_eq!("1e3".parse::<Scalar>().unwrap(), Scalar::from_int(1000));
        assert!("".parse::<Scalar>().is_err());
        assert!("x".parse::<Scalar>().is_err());
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("1.2.3".parse::<Scalar>().is_err());
    }

    #[test]
    fn parsed_values_are_exact() {
        let v = "1.2".parse::<Scalar>().unwrap();
        assert_eq!(v, Scalar::ratio(6, 5));
        assert!(v.is_exact());
    }

    #[test]
    fn strictly_less_tolerance() {
        let a = Scalar::Float(1.0);
        let b = Scalar::Float(1.0 + 1e-14);
        assert!(!a.strictly_less(&b, DEFAULT_REL_TOL));
        assert!(a.strictly_less(&Scalar::Float(1.0 + 1e-9), DEFAULT_REL_TOL));
        // Exact mode: any strict difference counts.
        let c = Scalar::ratio(1, 1);
        let d = &c + &Scalar::Exact(BigRational::new(1.into(), BigInt::from(10).pow(30)));
        assert!(c.strictly_less(&d, DEFAULT_REL_TOL));
    }

    #[test]
    fn display_round_trip() {
        let v = Scalar::ratio(121, 85);
        assert_eq!(v.to_string(), "121/85");
        assert_eq!(v.to_string().parse::<Scalar>().unwrap(), v);
        assert_eq!(Scalar::from_int(7).to_string(), "7");
    }

    #[test]
    fn float_to_rational_is_lossless() {
        let v = Scalar::Float(0.1);
        let r = v.to_rational();
        assert_eq!(r.to_f64().unwrap(), 0.1);
    }
}
