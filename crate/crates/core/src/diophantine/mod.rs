//! Scalar and vector primitives: distance to the nearest integer, the
//! multiplicative height `prod_plus`, and certified evaluation of the form
//! `prod_plus(q) * log*(prod_plus(q))^(m+n-1) * prod_i ||A_i q + gamma_i||`.

pub mod transcendental;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::rational::{bits_for, int, Interval, Rational};
pub use transcendental::{log_star_bounds, LogBounds};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiophantineError {
    #[error("expected a positive argument, got {0}")]
    NonPositiveInput(Rational),
    #[error("precision must be positive, got {0}")]
    NonPositivePrecision(Rational),
    #[error("the zero vector is not a valid q")]
    ZeroVector,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Integer vector `q`, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVector(pub Vec<i64>);

impl IntVector {
    pub fn new(entries: Vec<i64>) -> Self {
        IntVector(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// `|q|_inf`.
    pub fn sup_norm(&self) -> u64 {
        self.0.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn prod_plus(&self) -> u128 {
        prod_plus(self)
    }

    pub fn negated(&self) -> IntVector {
        IntVector(self.0.iter().map(|x| -x).collect())
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Dense `m x n` rational matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    m: usize,
    n: usize,
    entries: Vec<Rational>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, DiophantineError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(DiophantineError::DimensionMismatch(
                "matrix rows must be non-empty and of equal length".into(),
            ));
        }
        Ok(Matrix {
            m,
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn filled(m: usize, n: usize, value: Rational) -> Self {
        Matrix {
            m,
            n,
            entries: vec![value; m * n],
        }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Rational] {
        &mut self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.m).map(|i| self.row(i).to_vec()).collect()
    }

    /// `A_i q`.
    pub fn row_dot(&self, i: usize, q: &IntVector) -> Rational {
        self.row(i)
            .iter()
            .zip(q.entries())
            .filter(|(_, &qj)| qj != 0)
            .fold(Rational::zero(), |acc, (a, &qj)| acc + a * int(qj))
    }

    /// Sum of `coeff_ij * X_ij` against another matrix of the same shape.
    pub fn frobenius_dot(&self, other: &Matrix) -> Rational {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }
}

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn dist_nearest_int(x: &Rational) -> Rational {
    let frac = x - x.floor();
    let other = Rational::one() - &frac;
    std::cmp::min(frac, other)
}

/// `prod_j max(1, |q_j|)`. Panics on `u128` overflow.
pub fn prod_plus(q: &IntVector) -> u128 {
    q.entries().iter().fold(1u128, |acc, &x| {
        acc.checked_mul(u128::from(x.unsigned_abs().max(1)))
            .expect("prod_plus overflowed u128")
    })
}

/// All nonzero `q` in `Z^n` with `lo <= prod_plus(q) <= hi`, in lexicographic
/// order.
pub fn vectors_with_prod_plus_between(n: usize, lo: u64, hi: u64) -> Vec<IntVector> {
    let mut out = Vec::new();
    if n == 0 || hi == 0 || lo > hi {
        return out;
    }
    let mut current = vec![0i64; n];
    fill(&mut current, 0, hi, 1, lo, &mut out);
    out
}

fn fill(cur: &mut Vec<i64>, pos: usize, budget: u64, prod: u64, lo: u64, out: &mut Vec<IntVector>) {
    if pos == cur.len() {
        if prod >= lo && cur.iter().any(|&x| x != 0) {
            out.push(IntVector(cur.clone()));
        }
        return;
    }
    let bound = budget as i64;
    for x in -bound..=bound {
        let factor = x.unsigned_abs().max(1);
        if factor > budget {
            continue;
        }
        cur[pos] = x;
        fill(cur, pos + 1, budget / factor, prod * factor, lo, out);
    }
    cur[pos] = 0;
}

/// Exact parts of the form: `(prod_plus(q), prod_i ||A_i q + gamma_i||)`.
pub fn form_parts(
    a: &Matrix,
    gamma: &[Rational],
    q: &IntVector,
) -> Result<(u128, Rational), DiophantineError> {
    check_shapes(a, gamma, q)?;
    let mut d = Rational::one();
    for i in 0..a.rows() {
        let v = a.row_dot(i, q) + &gamma[i];
        d *= dist_nearest_int(&v);
        if d.is_zero() {
            break;
        }
    }
    Ok((prod_plus(q), d))
}

fn check_shapes(a: &Matrix, gamma: &[Rational], q: &IntVector) -> Result<(), DiophantineError> {
    if q.len() != a.cols() {
        return Err(DiophantineError::DimensionMismatch(format!(
            "q has length {} but A has {} columns",
            q.len(),
            a.cols()
        )));
    }
    if gamma.len() != a.rows() {
        return Err(DiophantineError::DimensionMismatch(format!(
            "gamma has length {} but A has {} rows",
            gamma.len(),
            a.rows()
        )));
    }
    if q.is_zero() {
        return Err(DiophantineError::ZeroVector);
    }
    Ok(())
}

/// Enclosure of `log*(p)^lambda`, exact (`1`) when `p <= 2`, with width small
/// enough that multiplying by `p` keeps it within `precision`.
pub fn log_star_power(p: u128, lambda: u32, precision: &Rational) -> Interval {
    if p <= 2 || lambda == 0 {
        return Interval::point(Rational::one());
    }
    let pr = Rational::from_integer(BigInt::from(p));
    let target = precision / &pr;
    let log_bits = 128 - p.leading_zeros();
    let mut bits = bits_for(&target) + log_bits + lambda * (32 - log_bits.leading_zeros()) + 4;
    loop {
        let l = transcendental::log_star_interval(&pr, bits).expect("p is positive");
        let pow = l.powi(lambda);
        if pow.width() <= target {
            return pow;
        }
        bits += 16;
    }
}

/// Certified bounds on `prod_plus(q) * log*(prod_plus(q))^(m+n-1) * prod_i ||A_i q + gamma_i||`.
pub fn mad_form_bounds(
    a: &Matrix,
    gamma: &[Rational],
    q: &IntVector,
    precision: &Rational,
) -> Result<LogBounds, DiophantineError> {
    if !precision.is_positive() {
        return Err(DiophantineError::NonPositivePrecision(precision.clone()));
    }
    let (p, d) = form_parts(a, gamma, q)?;
    let lambda = (a.rows() + a.cols() - 1) as u32;
    let scale = Rational::from_integer(BigInt::from(p)) * &d;
    if d.is_zero() || p <= 2 {
        return Ok(LogBounds::exact(scale, precision.clone()));
    }
    let pow = log_star_power(p, lambda, precision);
    Ok(LogBounds::from_interval(pow.scale(&scale), precision.clone()))
}

/// Tie order used by scans: smaller `|q|_inf` shell first, then lexicographic.
pub fn shell_order(a: &IntVector, b: &IntVector) -> Ordering {
    a.sup_norm().cmp(&b.sup_norm()).then_with(|| a.cmp(b))
}

/// Minimum certified lower bound of [`mad_form_bounds`] over all nonzero `q`
/// with `prod_plus(q) <= q_budget`, and a minimizing `q`.
pub fn scan_min_form(
    a: &Matrix,
    gamma: &[Rational],
    q_budget: u64,
    precision: &Rational,
) -> Result<(Rational, IntVector), DiophantineError> {
    if !precision.is_positive() {
        return Err(DiophantineError::NonPositivePrecision(precision.clone()));
    }
    if q_budget == 0 {
        return Err(DiophantineError::DimensionMismatch("q_budget must be at least 1".into()));
    }
    if gamma.len() != a.rows() {
        return Err(DiophantineError::DimensionMismatch("gamma length differs from row count".into()));
    }
    let lambda = (a.rows() + a.cols() - 1) as u32;
    let qs = vectors_with_prod_plus_between(a.cols(), 1, q_budget);
    let mut heights: Vec<u128> = qs.iter().map(prod_plus).collect();
    heights.sort_unstable();
    heights.dedup();
    let logs: HashMap<u128, Interval> = heights
        .par_iter()
        .map(|&p| (p, log_star_power(p, lambda, precision)))
        .collect();
    let best = qs
        .par_iter()
        .map(|q| {
            let (p, d) = form_parts(a, gamma, q).expect("shapes checked");
            let lower = if d.is_zero() {
                Rational::zero()
            } else {
                logs[&p].lo.clone() * Rational::from_integer(BigInt::from(p)) * d
            };
            (lower, q.clone())
        })
        .min_by(|x, y| x.0.cmp(&y.0).then_with(|| shell_order(&x.1, &y.1)))
        .expect("budget >= 1 yields at least one vector");
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn mat(rows: &[&[(i64, i64)]]) -> Matrix {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(a, b)| ratio(a, b)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn nearest_integer_examples() {
        assert_eq!(dist_nearest_int(&ratio(27, 10)), ratio(3, 10));
        assert_eq!(dist_nearest_int(&ratio(1, 2)), ratio(1, 2));
        assert_eq!(dist_nearest_int(&ratio(-7, 3)), ratio(1, 3));
        assert_eq!(dist_nearest_int(&int(5)), int(0));
    }

    #[test]
    fn prod_plus_examples() {
        assert_eq!(prod_plus(&IntVector(vec![0, 3, -2])), 6);
        assert_eq!(prod_plus(&IntVector(vec![0, 0, 1])), 1);
        assert_eq!(prod_plus(&IntVector(vec![-5])), 5);
        assert_eq!(prod_plus(&IntVector(vec![0, 0])), 1);
    }

    #[test]
    fn form_examples_are_exact() {
        let p = ratio(1, 1000);
        let b = mad_form_bounds(&mat(&[&[(1, 3)]]), &[int(0)], &IntVector(vec![2]), &p).unwrap();
        assert!(b.is_exact());
        assert_eq!(b.lower, ratio(2, 3));

        let b = mad_form_bounds(&mat(&[&[(0, 1)]]), &[ratio(1, 2)], &IntVector(vec![1]), &p).unwrap();
        assert_eq!((b.lower.clone(), b.upper.clone()), (ratio(1, 2), ratio(1, 2)));

        let b = mad_form_bounds(&mat(&[&[(1, 4), (1, 4)]]), &[int(0)], &IntVector(vec![1, 2]), &p).unwrap();
        assert!(b.is_exact());
        assert_eq!(b.lower, ratio(1, 2));
    }

    #[test]
    fn form_rejects_zero_and_bad_shapes() {
        let a = mat(&[&[(1, 3)]]);
        let p = ratio(1, 10);
        assert_eq!(
            mad_form_bounds(&a, &[int(0)], &IntVector(vec![0]), &p),
            Err(DiophantineError::ZeroVector)
        );
        assert!(mad_form_bounds(&a, &[int(0)], &IntVector(vec![1, 1]), &p).is_err());
    }

    #[test]
    fn form_with_log_factor_brackets_reference() {
        // q = 7: 7 * ln(7)^1 * ||7/3|| = 7/3 * ln 7 ~ 4.540 5...
        let a = mat(&[&[(1, 3)]]);
        let precision = ratio(1, 1 << 30);
        let b = mad_form_bounds(&a, &[int(0)], &IntVector(vec![7]), &precision).unwrap();
        // ln 7 = 1.945910149055313305105352743443179729637...
        let ln7 = Rational::new(
            BigInt::from(1_945_910_149_055_313_305i64),
            BigInt::from(1_000_000_000_000_000_000i64),
        );
        let reference = ln7 * ratio(7, 3);
        assert!(b.lower <= &reference + ratio(1, 1_000_000_000_000_000) && reference <= &b.upper + ratio(1, 1_000_000_000_000_000));
        assert!(b.width() <= precision);
    }

    #[test]
    fn scan_examples() {
        let p = ratio(1, 1 << 20);
        let (min, arg) = scan_min_form(&mat(&[&[(1, 2)]]), &[int(0)], 4, &p).unwrap();
        assert_eq!(min, int(0));
        assert_eq!(arg, IntVector(vec![-2]));

        let (min, arg) = scan_min_form(&mat(&[&[(1, 3), (1, 3)]]), &[int(0)], 3, &p).unwrap();
        assert_eq!(min, int(0));
        // Shell 1 already contains (-1, 1) with (-1 + 1)/3 = 0.
        assert_eq!(arg, IntVector(vec![-1, 1]));
    }

    #[test]
    fn enumeration_matches_filter() {
        for n in 1..=3usize {
            for hi in 1..=12u64 {
                let fast = vectors_with_prod_plus_between(n, 1, hi);
                let b = hi as i64;
                let side = (2 * b + 1) as usize;
                let brute: Vec<IntVector> = (0..side.pow(n as u32))
                    .map(|mut code| {
                        let mut v = vec![0i64; n];
                        for slot in v.iter_mut().rev() {
                            *slot = (code % side) as i64 - b;
                            code /= side;
                        }
                        IntVector(v)
                    })
                    .filter(|q| !q.is_zero() && prod_plus(q) <= hi as u128)
                    .collect();
                assert_eq!(fast, brute, "n={n} hi={hi}");
            }
        }
    }

    proptest! {
        #[test]
        fn nearest_integer_is_periodic_and_even(num in -10_000i64..10_000, den in 1i64..500, z in -50i64..50) {
            let x = ratio(num, den);
            let d = dist_nearest_int(&x);
            prop_assert!(d >= int(0) && d <= ratio(1, 2));
            prop_assert_eq!(dist_nearest_int(&(&x + int(z))), d.clone());
            prop_assert_eq!(dist_nearest_int(&-x), d);
        }

        #[test]
        fn prod_plus_is_at_most_sup_norm_power(q in proptest::collection::vec(-40i64..40, 1..5)) {
            let v = IntVector(q);
            prop_assume!(!v.is_zero());
            let sup = v.sup_norm() as u128;
            prop_assert!(prod_plus(&v) >= 1);
            prop_assert!(prod_plus(&v) <= sup.pow(v.len() as u32));
        }

        #[test]
        fn log_star_is_monotone(a in 1i64..5000, b in 1i64..5000, da in 1i64..50, db in 1i64..50) {
            let x = ratio(a, da);
            let y = ratio(b, db);
            let (x, y) = if x <= y { (x, y) } else { (y, x) };
            let p = ratio(1, 1 << 20);
            let lx = log_star_bounds(&x, &p).unwrap();
            let ly = log_star_bounds(&y, &p).unwrap();
            prop_assert!(lx.lower <= ly.upper);
            prop_assert!(lx.width() <= p.clone() && ly.width() <= p);
            prop_assert!(lx.lower >= int(1));
        }
    }
}
