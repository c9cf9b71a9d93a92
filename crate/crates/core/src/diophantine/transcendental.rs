//! Certified rational enclosures of `e`, `ln` and `exp`.
//!
//! Every function returns an [`Interval`] guaranteed to contain the true
//! value. Series truncation errors are bounded explicitly and endpoints are
//! rounded outward to dyadic rationals so that denominators stay small.

use std::cmp::Ordering;
use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};

use super::DiophantineError;
use crate::rational::{bits_for, int, pow2, ratio, Interval, Rational};

const CACHED_BITS: u32 = 320;

/// Certified enclosure of a positive real, with the requested width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogBounds {
    pub lower: Rational,
    pub upper: Rational,
    pub precision: Rational,
}

impl LogBounds {
    pub fn exact(v: Rational, precision: Rational) -> Self {
        LogBounds {
            lower: v.clone(),
            upper: v,
            precision,
        }
    }

    pub fn from_interval(iv: Interval, precision: Rational) -> Self {
        LogBounds {
            lower: iv.lo,
            upper: iv.hi,
            precision,
        }
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.lower.clone(), self.upper.clone())
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }
}

fn e_uncached(bits: u32) -> Interval {
    // sum_{k<=N} 1/k!  <=  e  <=  sum_{k<=N} 1/k! + 1/(N! N)
    let target = Rational::new(One::one(), pow2(bits + 2));
    let mut sum = int(1);
    let mut term = int(1);
    let mut k = 1i64;
    loop {
        term /= int(k);
        sum += &term;
        let tail = &term / int(k);
        if tail <= target {
            return Interval::new(sum.clone(), sum + tail).round_out(bits + 2);
        }
        k += 1;
    }
}

/// Enclosure of `e` with width at most `2^-bits`.
pub fn e_bounds(bits: u32) -> Interval {
    static CACHE: OnceLock<Interval> = OnceLock::new();
    if bits <= CACHED_BITS {
        CACHE.get_or_init(|| e_uncached(CACHED_BITS)).clone()
    } else {
        e_uncached(bits)
    }
}

/// `2 atanh(z)` for `0 <= z <= 1/3`, i.e. `ln((1+z)/(1-z))`.
fn two_atanh(z: &Rational, bits: u32) -> Interval {
    if z.is_zero() {
        return Interval::point(Rational::zero());
    }
    let target = Rational::new(One::one(), pow2(bits + 3));
    let z2 = z * z;
    let one_minus = int(1) - &z2;
    let mut power = z.clone();
    let mut sum = Rational::zero();
    let mut j = 0i64;
    loop {
        sum += &power / int(2 * j + 1);
        power *= &z2;
        j += 1;
        // remainder of sum_{i>=j} z^{2i+1}/(2i+1) <= z^{2j+1} / ((2j+1)(1-z^2))
        let rem = &power / (int(2 * j + 1) * &one_minus);
        if rem <= target {
            let lo = &sum * int(2);
            let hi = (&sum + rem) * int(2);
            return Interval::new(lo, hi).round_out(bits + 2);
        }
    }
}

fn ln2_uncached(bits: u32) -> Interval {
    two_atanh(&ratio(1, 3), bits)
}

/// Enclosure of `ln 2` with width at most `2^-bits`.
pub fn ln2_bounds(bits: u32) -> Interval {
    static CACHE: OnceLock<Interval> = OnceLock::new();
    if bits <= CACHED_BITS {
        CACHE.get_or_init(|| ln2_uncached(CACHED_BITS)).clone()
    } else {
        ln2_uncached(bits)
    }
}

/// `floor(log2 x)` for positive rational `x`.
fn floor_log2(x: &Rational) -> i64 {
    let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
    let two = int(2);
    let at = |k: i64| -> Rational { two.pow(k as i32) };
    while &at(k) > x {
        k -= 1;
    }
    while &at(k + 1) <= x {
        k += 1;
    }
    k
}

/// Enclosure of `ln x` with width at most `2^-bits`. Requires `x > 0`.
pub fn ln_bounds(x: &Rational, bits: u32) -> Result<Interval, DiophantineError> {
    if !x.is_positive() {
        return Err(DiophantineError::NonPositiveInput(x.clone()));
    }
    if x.is_one() {
        return Ok(Interval::point(Rational::zero()));
    }
    if x < &int(1) {
        return Ok(ln_bounds(&x.recip(), bits)?.neg());
    }
    let k = floor_log2(x);
    let y = x / int(2).pow(k as i32);
    let z = (&y - int(1)) / (&y + int(1));
    let extra = 64 - (k.unsigned_abs() + 1).leading_zeros();
    let ln2 = ln2_bounds(bits + extra + 2);
    let reduced = two_atanh(&z, bits + 2);
    Ok(ln2.scale(&int(k)).add(&reduced).round_out(bits + 1))
}

fn exp_nonneg(x: &Rational, bits: u32) -> Interval {
    if x.is_zero() {
        return Interval::point(int(1));
    }
    // Halve until the argument is at most 1/2, sum the Taylor series, square back.
    let mut s = 0u32;
    let mut y = x.clone();
    while y > ratio(1, 2) {
        y /= int(2);
        s += 1;
    }
    // Squaring s times multiplies relative error by about 2^s; exp(x) itself
    // scales absolute error, so budget for both.
    let magnitude = {
        use num_traits::ToPrimitive;
        (x.ceil().to_integer().to_u64().unwrap_or(u64::MAX / 4) as f64 * 1.45).ceil() as u32
    };
    let work = bits + s + magnitude + 8;
    let target = Rational::new(One::one(), pow2(work));
    let mut sum = int(1);
    let mut term = int(1);
    let mut k = 1i64;
    let mut iv = loop {
        term = &term * &y / int(k);
        sum += &term;
        // tail <= term * y/(k+1) * 2  since successive ratios are <= 1/2
        let tail = &term * &y * int(2) / int(k + 1);
        if tail <= target {
            break Interval::new(sum.clone(), &sum + tail).round_out(work);
        }
        k += 1;
    };
    for _ in 0..s {
        iv = iv.mul(&iv).round_out(work);
    }
    iv
}

/// Enclosure of `exp x` with width at most `2^-bits`.
pub fn exp_bounds(x: &Rational, bits: u32) -> Interval {
    let mut extra = 0;
    loop {
        let iv = if x.is_negative() {
            // exp(-x) >= 1, so the reciprocal is no wider than its argument.
            exp_nonneg(&-x, bits + extra + 2).recip().round_out(bits + extra + 2)
        } else {
            exp_nonneg(x, bits + extra)
        };
        if iv.width() <= Rational::new(One::one(), pow2(bits)) {
            return iv;
        }
        extra += 16;
    }
}

/// Enclosure of `exp` over an interval argument, widened by `2^-bits`.
pub fn exp_interval(arg: &Interval, bits: u32) -> Interval {
    Interval::new(exp_bounds(&arg.lo, bits).lo, exp_bounds(&arg.hi, bits).hi)
}

/// Enclosure of `ln` over a positive interval argument.
pub fn ln_interval(arg: &Interval, bits: u32) -> Result<Interval, DiophantineError> {
    Ok(Interval::new(
        ln_bounds(&arg.lo, bits)?.lo,
        ln_bounds(&arg.hi, bits)?.hi,
    ))
}

/// Certified comparison of `x` against `e^k`. Never returns `Equal` for
/// rational `x` and `k != 0` since `e^k` is irrational.
pub fn cmp_e_power(x: &Rational, k: u32) -> Ordering {
    if k == 0 {
        return x.cmp(&int(1));
    }
    let mut bits = 32;
    loop {
        let ek = e_bounds(bits).powi(k);
        if x < &ek.lo {
            return Ordering::Less;
        }
        if x > &ek.hi {
            return Ordering::Greater;
        }
        bits *= 2;
    }
}

/// `log*(x) = ln(max(e, x))` with `upper - lower <= precision`.
///
/// Returns exactly `1` when a certified comparison shows `x <= e`; otherwise
/// the lower endpoint is clamped to `1`.
pub fn log_star_bounds(x: &Rational, precision: &Rational) -> Result<LogBounds, DiophantineError> {
    if !x.is_positive() {
        return Err(DiophantineError::NonPositiveInput(x.clone()));
    }
    if !precision.is_positive() {
        return Err(DiophantineError::NonPositivePrecision(precision.clone()));
    }
    if cmp_e_power(x, 1) == Ordering::Less {
        return Ok(LogBounds::exact(int(1), precision.clone()));
    }
    let iv = ln_bounds(x, bits_for(precision))?.max_with(&int(1));
    Ok(LogBounds::from_interval(iv, precision.clone()))
}

/// Interval form of `log*` for callers that combine enclosures.
pub fn log_star_interval(x: &Rational, bits: u32) -> Result<Interval, DiophantineError> {
    let precision = Rational::new(One::one(), pow2(bits));
    log_star_bounds(x, &precision).map(|b| b.interval())
}

/// `log*` of a positive interval argument: `max(1, ln(.))` endpoint-wise.
pub fn log_star_of_interval(arg: &Interval, bits: u32) -> Result<Interval, DiophantineError> {
    Ok(Interval::new(
        log_star_interval(&arg.lo, bits)?.lo,
        log_star_interval(&arg.hi, bits)?.hi,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::to_f64;

    // Reference digits, independent of the series code above.
    const E_DIGITS: &str = "2.71828182845904523536028747135266249775724709369995";
    const LN2_DIGITS: &str = "0.69314718055994530941723212145817656807550013436025";
    const LN8_DIGITS: &str = "2.07944154167983592825169636437452970422650040308076";

    fn decimal(s: &str) -> Rational {
        let (int_part, frac) = s.split_once('.').unwrap();
        let digits = format!("{int_part}{frac}");
        let num: num_bigint::BigInt = digits.parse().unwrap();
        Rational::new(num, num_bigint::BigInt::from(10u32).pow(frac.len() as u32))
    }

    fn close(iv: &Interval, reference: &Rational, slack: &Rational) {
        assert!(&iv.lo - slack <= *reference && *reference <= &iv.hi + slack, "{iv} vs {reference}");
    }

    #[test]
    fn e_matches_reference_digits() {
        let iv = e_bounds(150);
        close(&iv, &decimal(E_DIGITS), &ratio(1, 1_000_000_000_000_000_000));
        assert!(iv.width() <= Rational::new(One::one(), pow2(150)));
    }

    #[test]
    fn ln2_and_ln8() {
        let ln2 = ln2_bounds(120);
        close(&ln2, &decimal(LN2_DIGITS), &ratio(1, 1_000_000_000_000_000_000));
        let ln8 = ln_bounds(&int(8), 100).unwrap();
        close(&ln8, &decimal(LN8_DIGITS), &ratio(1, 1_000_000_000_000_000_000));
        assert!(ln8.width() <= Rational::new(One::one(), pow2(100)));
    }

    #[test]
    fn ln_of_fractions_is_negative() {
        let iv = ln_bounds(&ratio(1, 8), 60).unwrap();
        close(&iv, &-decimal(LN8_DIGITS), &ratio(1, 1_000_000_000_000));
        assert_eq!(ln_bounds(&int(1), 10).unwrap(), Interval::point(Rational::zero()));
        assert!(ln_bounds(&int(0), 10).is_err());
    }

    #[test]
    fn exp_round_trips_ln() {
        for x in [ratio(-1, 2), int(0), ratio(1, 3), int(1), int(5), ratio(-17, 4)] {
            let e = exp_bounds(&x, 80);
            let back = ln_interval(&e, 80).unwrap();
            assert!(back.lo <= x && x <= back.hi, "exp/ln mismatch at {x}");
            assert!(e.width() <= Rational::new(One::one(), pow2(80)));
        }
        let e1 = exp_bounds(&int(1), 100);
        close(&e1, &decimal(E_DIGITS), &ratio(1, 1_000_000_000_000_000_000));
    }

    #[test]
    fn e_power_comparisons() {
        assert_eq!(cmp_e_power(&int(2), 1), Ordering::Less);
        assert_eq!(cmp_e_power(&int(3), 1), Ordering::Greater);
        assert_eq!(cmp_e_power(&int(20), 3), Ordering::Less);
        assert_eq!(cmp_e_power(&int(21), 3), Ordering::Greater);
        assert_eq!(cmp_e_power(&ratio(271_828_182_845_904_523, 100_000_000_000_000_000), 1), Ordering::Less);
    }

    #[test]
    fn log_star_small_arguments_are_exactly_one() {
        for x in [int(1), int(2), ratio(1, 100), ratio(271, 100)] {
            let b = log_star_bounds(&x, &ratio(1, 10)).unwrap();
            assert!(b.is_exact());
            assert_eq!(b.lower, int(1));
        }
    }

    #[test]
    fn log_star_of_eight() {
        let b = log_star_bounds(&int(8), &ratio(1, 1000)).unwrap();
        assert!(b.width() <= ratio(1, 1000));
        let reference = decimal(LN8_DIGITS);
        assert!(b.lower <= reference && reference <= b.upper);
        assert!((to_f64(&b.lower) - 2.0794).abs() < 1e-3);
    }

    #[test]
    fn log_star_errors() {
        assert!(matches!(
            log_star_bounds(&int(0), &ratio(1, 2)),
            Err(DiophantineError::NonPositiveInput(_))
        ));
        assert!(log_star_bounds(&int(-3), &ratio(1, 2)).is_err());
    }
}
