//! Exact rational scalars, canonical `num/den` strings, and closed rational
//! intervals with outward dyadic rounding.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("rational `{0}` must have the form numerator/denominator")]
    Shape(String),
    #[error("rational `{0}` has a zero denominator")]
    ZeroDenominator(String),
    #[error("rational `{0}` is not in lowest terms")]
    NotReduced(String),
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn big(v: &BigInt) -> Rational {
    Rational::from_integer(v.clone())
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Parses the canonical `p/q` form: optional leading `-` on the numerator,
/// decimal digits, `q > 0`, `gcd(p, q) = 1`, no leading zeros.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let shape = || ParseRationalError::Shape(s.to_string());
    let (num, den) = s.split_once('/').ok_or_else(shape)?;
    let digits = num.strip_prefix('-').unwrap_or(num);
    if !is_digits(digits) || !is_digits(den) {
        return Err(shape());
    }
    let leading_zero = |d: &str| d.len() > 1 && d.starts_with('0');
    if leading_zero(digits) || leading_zero(den) || num == "-0" {
        return Err(ParseRationalError::NotReduced(s.to_string()));
    }
    let p = BigInt::from_str(num).map_err(|_| shape())?;
    let q = BigInt::from_str(den).map_err(|_| shape())?;
    if q.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(s.to_string()));
    }
    if !p.gcd(&q).is_one() {
        return Err(ParseRationalError::NotReduced(s.to_string()));
    }
    Ok(Rational::new_raw(p, q))
}

/// Canonical `p/q` string; integers are written with denominator 1.
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Serde adapter: a rational carried as its canonical string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalString(pub Rational);

impl Serialize for RationalString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s)
            .map(RationalString)
            .map_err(serde::de::Error::custom)
    }
}

impl From<Rational> for RationalString {
    fn from(x: Rational) -> Self {
        RationalString(x)
    }
}

pub fn to_strings(v: &[Rational]) -> Vec<RationalString> {
    v.iter().cloned().map(RationalString).collect()
}

pub fn from_strings(v: &[RationalString]) -> Vec<Rational> {
    v.iter().map(|r| r.0.clone()).collect()
}

pub fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// Largest dyadic `a / 2^bits` that is `<= x`.
pub fn round_down(x: &Rational, bits: u32) -> Rational {
    let scale = pow2(bits);
    let scaled = (x * big(&scale)).floor().to_integer();
    Rational::new(scaled, scale)
}

/// Smallest dyadic `a / 2^bits` that is `>= x`.
pub fn round_up(x: &Rational, bits: u32) -> Rational {
    let scale = pow2(bits);
    let scaled = (x * big(&scale)).ceil().to_integer();
    Rational::new(scaled, scale)
}

/// Smallest `b` with `2^-b <= precision`. `precision` must be positive.
pub fn bits_for(precision: &Rational) -> u32 {
    debug_assert!(precision.is_positive());
    let mut b = 0u32;
    let mut unit = Rational::one();
    while &unit > precision {
        unit /= int(2);
        b += 1;
    }
    b
}

/// Integer `floor(sqrt(v))` and whether it was exact.
pub fn isqrt(v: &BigUint) -> (BigUint, bool) {
    let r = v.sqrt();
    let exact = &r * &r == *v;
    (r, exact)
}

pub fn abs_big(v: &BigInt) -> BigUint {
    v.magnitude().clone()
}

pub fn signum(x: &Rational) -> Ordering {
    match x.numer().sign() {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

/// Closed interval `[lo, hi]` with rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval::new(&self.lo - &other.hi, &self.hi - &other.lo)
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-&self.hi, -&self.lo)
    }

    pub fn scale(&self, k: &Rational) -> Interval {
        if k.is_negative() {
            Interval::new(&self.hi * k, &self.lo * k)
        } else {
            Interval::new(&self.lo * k, &self.hi * k)
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Interval::new(lo, hi)
    }

    /// Reciprocal of an interval that does not contain zero.
    pub fn recip(&self) -> Interval {
        assert!(
            self.lo.is_positive() || self.hi.is_negative(),
            "reciprocal of an interval containing zero"
        );
        Interval::new(self.hi.recip(), self.lo.recip())
    }

    pub fn powi(&self, e: u32) -> Interval {
        let mut acc = Interval::point(Rational::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn max_with(&self, x: &Rational) -> Interval {
        Interval::new(
            std::cmp::max(self.lo.clone(), x.clone()),
            std::cmp::max(self.hi.clone(), x.clone()),
        )
    }

    /// Widens outward to dyadic endpoints with `bits` fractional bits.
    pub fn round_out(&self, bits: u32) -> Interval {
        Interval::new(round_down(&self.lo, bits), round_up(&self.hi, bits))
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Approximate decimal rendering for reports. Never used in decisions.
pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        // Scale down very large numerators and denominators together.
        let n = x.numer().bits() as i64;
        let d = x.denom().bits() as i64;
        let shift = (n.max(d) - 1000).max(0) as usize;
        let num = (x.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let den = (x.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        num / den
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_accepts_canonical_forms() {
        assert_eq!(parse_rational("3/10").unwrap(), ratio(3, 10));
        assert_eq!(parse_rational("-7/3").unwrap(), ratio(-7, 3));
        assert_eq!(parse_rational("0/1").unwrap(), int(0));
        assert_eq!(parse_rational("5/1").unwrap(), int(5));
    }

    #[test]
    fn parse_rejects_malformed() {
        for bad in ["3/0", "0.5", "1/2.0", "1", "2/4", "+1/2", "1/-2", "01/2", "-0/1", "", "/", "a/b"] {
            assert!(parse_rational(bad).is_err(), "{bad} should be rejected");
        }
        assert!(matches!(
            parse_rational("3/0"),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
    }

    #[test]
    fn format_round_trips() {
        for x in [ratio(-7, 3), int(0), int(12), ratio(1, 1 << 40)] {
            let s = format_rational(&x);
            assert_eq!(parse_rational(&s).unwrap(), x);
            assert_eq!(format_rational(&parse_rational(&s).unwrap()), s);
        }
    }

    #[test]
    fn dyadic_rounding_is_directed() {
        let x = ratio(1, 3);
        let lo = round_down(&x, 10);
        let hi = round_up(&x, 10);
        assert!(lo <= x && x <= hi);
        assert!(&hi - &lo <= ratio(1, 1024));
        assert_eq!(round_down(&ratio(-1, 3), 1), ratio(-1, 2));
        assert_eq!(round_up(&ratio(1, 2), 1), ratio(1, 2));
    }

    #[test]
    fn bits_for_precision() {
        assert_eq!(bits_for(&int(1)), 0);
        assert_eq!(bits_for(&ratio(1, 1000)), 10);
        assert_eq!(bits_for(&ratio(1, 1024)), 10);
    }

    #[test]
    fn interval_mul_handles_signs() {
        let a = Interval::new(int(-2), int(3));
        let b = Interval::new(int(-1), int(4));
        let p = a.mul(&b);
        assert_eq!(p, Interval::new(int(-8), int(12)));
        assert_eq!(Interval::new(int(2), int(4)).recip(), Interval::new(ratio(1, 4), ratio(1, 2)));
    }
}
