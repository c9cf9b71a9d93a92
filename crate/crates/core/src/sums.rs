//! Sums `S_L(Q) = sum_{0 < q in box} prod_i ||L_i q||^{-1}` for rational
//! matrices, growth tables, and semimultiplicative margins.

use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::diophantine::transcendental::{log_star_interval, LogBounds};
use crate::diophantine::{dist_nearest_int, shell_order, IntVector, Matrix};
use crate::rational::{bits_for, format_rational, int, pow2, to_f64, Interval, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SumsError {
    #[error("||L_{row} q|| vanishes at q = {q}: the sum diverges")]
    DivergentTerm { q: IntVector, row: usize },
    #[error("box half-widths must be positive and one per column")]
    InvalidBox,
    #[error("invalid step function: {0}")]
    InvalidStep(String),
}

/// `L`, the box `prod_j [-Q_j, Q_j]`, and the target width of the result
/// (`0` requests the exact rational sum).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumSpec {
    pub l: Matrix,
    pub q: Vec<u64>,
    pub precision: Rational,
    /// Evaluate one of each `±q` pair and double.
    pub use_symmetry: bool,
}

impl SumSpec {
    pub fn exact(l: Matrix, q: Vec<u64>) -> Self {
        SumSpec {
            l,
            q,
            precision: Rational::zero(),
            use_symmetry: true,
        }
    }

    pub fn cube(l: Matrix, q: u64, precision: Rational) -> Self {
        let n = l.cols();
        SumSpec {
            l,
            q: vec![q; n],
            precision,
            use_symmetry: true,
        }
    }
}

/// Row `i` of `L` as integers over a common denominator: `L_i = N_i / D_i`.
struct IntegerRows {
    nums: Vec<Vec<BigInt>>,
    dens: Vec<BigInt>,
}

impl IntegerRows {
    fn new(l: &Matrix) -> Self {
        let mut nums = Vec::with_capacity(l.rows());
        let mut dens = Vec::with_capacity(l.rows());
        for i in 0..l.rows() {
            let d = l.row(i).iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            nums.push(l.row(i).iter().map(|x| x.numer() * (&d / x.denom())).collect());
            dens.push(d);
        }
        IntegerRows { nums, dens }
    }

    /// `(prod_i D_i, prod_i s_i)` with `||L_i q|| = s_i / D_i`.
    fn term(&self, q: &IntVector) -> Result<(BigInt, BigInt), SumsError> {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (row, (n, d)) in self.nums.iter().zip(&self.dens).enumerate() {
            let dot: BigInt = n.iter().zip(&q.0).map(|(a, &b)| a * b).sum();
            let r = dot.mod_floor(d);
            let s = std::cmp::min(r.clone(), d - &r);
            if s.is_zero() {
                // report the sign representative so the symmetric path agrees
                let q = if is_canonical(q) { q.clone() } else { q.negated() };
                return Err(SumsError::DivergentTerm { q, row });
            }
            num *= d;
            den *= s;
        }
        Ok((num, den))
    }
}

/// Nonzero vectors of the box with `|q|_inf = s`, in lexicographic order.
pub fn shell(box_q: &[u64], s: u64) -> Vec<IntVector> {
    let n = box_q.len();
    let mut out = Vec::new();
    let mut cur = vec![0i64; n];
    fn rec(box_q: &[u64], s: u64, pos: usize, hit: bool, cur: &mut Vec<i64>, out: &mut Vec<IntVector>) {
        if pos == cur.len() {
            if hit {
                out.push(IntVector(cur.clone()));
            }
            return;
        }
        let b = box_q[pos].min(s) as i64;
        for x in -b..=b {
            cur[pos] = x;
            rec(box_q, s, pos + 1, hit || x.unsigned_abs() == s, cur, out);
        }
    }
    if s > 0 && n > 0 {
        rec(box_q, s, 0, false, &mut cur, &mut out);
    }
    out
}

/// First nonzero entry positive: one representative of each `±q` pair.
fn is_canonical(q: &IntVector) -> bool {
    q.0.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

enum Acc {
    Exact(Rational),
    /// Sums of `floor` and `ceil` of `2^bits · term`.
    Fixed(BigInt, BigInt),
}

/// Certified bounds on `S_L(Q)`; exact when `precision = 0`.
pub fn sum_reciprocal_fractional(spec: &SumSpec) -> Result<LogBounds, SumsError> {
    let n = spec.l.cols();
    if spec.q.len() != n || spec.q.iter().any(|&x| x == 0) {
        return Err(SumsError::InvalidBox);
    }
    let rows = IntegerRows::new(&spec.l);
    let top = *spec.q.iter().max().expect("n >= 1");
    let terms: u128 = spec.q.iter().map(|&x| 2 * u128::from(x) + 1).product::<u128>() - 1;
    let bits = if spec.precision.is_positive() {
        let per_term = &spec.precision / Rational::from_integer(BigInt::from(terms));
        Some(bits_for(&per_term))
    } else {
        None
    };
    let shells: Vec<Result<Acc, SumsError>> = (1..=top)
        .into_par_iter()
        .map(|s| {
            let mut acc = match bits {
                None => Acc::Exact(Rational::zero()),
                Some(_) => Acc::Fixed(BigInt::zero(), BigInt::zero()),
            };
            for q in shell(&spec.q, s) {
                let weight = if spec.use_symmetry {
                    if !is_canonical(&q) {
                        continue;
                    }
                    2
                } else {
                    1
                };
                let (num, den) = rows.term(&q)?;
                match (&mut acc, bits) {
                    (Acc::Exact(sum), _) => *sum += Rational::new(num * weight, den),
                    (Acc::Fixed(lo, hi), Some(b)) => {
                        let scaled = num << b as usize;
                        let (f, r) = scaled.div_mod_floor(&den);
                        let c = if r.is_zero() { f.clone() } else { &f + 1 };
                        *lo += f * weight;
                        *hi += c * weight;
                    }
                    (Acc::Fixed(..), None) => unreachable!(),
                }
            }
            Ok(acc)
        })
        .collect();
    let mut exact = Rational::zero();
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    for acc in shells {
        match acc? {
            Acc::Exact(x) => exact += x,
            Acc::Fixed(a, b) => {
                lo += a;
                hi += b;
            }
        }
    }
    Ok(match bits {
        None => LogBounds::exact(exact, Rational::zero()),
        Some(b) => {
            let scale = pow2(b);
            LogBounds::from_interval(
                Interval::new(Rational::new(lo, scale.clone()), Rational::new(hi, scale)),
                spec.precision.clone(),
            )
        }
    })
}

/// Term-by-term exact sum in reverse lexicographic order over the whole box,
/// without shells, symmetry or the integer fast path.
pub fn sum_reciprocal_naive(l: &Matrix, box_q: &[u64]) -> Result<Rational, SumsError> {
    let n = box_q.len();
    let total: u64 = box_q.iter().map(|&x| 2 * x + 1).product();
    let mut sum = Rational::zero();
    for code in (0..total).rev() {
        let mut c = code;
        let q = IntVector(
            box_q
                .iter()
                .map(|&b| {
                    let w = 2 * b + 1;
                    let d = (c % w) as i64 - b as i64;
                    c /= w;
                    d
                })
                .collect(),
        );
        if q.is_zero() || q.len() != n {
            continue;
        }
        let mut term = Rational::one();
        for i in 0..l.rows() {
            let d = dist_nearest_int(&l.row_dot(i, &q));
            if d.is_zero() {
                return Err(SumsError::DivergentTerm { q, row: i });
            }
            term /= d;
        }
        sum += term;
    }
    Ok(sum)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthRow {
    pub q: u64,
    pub s: LogBounds,
    /// `S / (Q^n log*(Q)^m)`
    pub lower_column: Interval,
    /// `S / (Q^n log*(Q)^{2m+n-2})`
    pub upper_column: Interval,
}

/// Absolute width of each `S` enclosure in growth tables.
const GROWTH_PRECISION_BITS: u32 = 10;

pub fn growth_table(l: &Matrix, q_list: &[u64]) -> Result<Vec<GrowthRow>, SumsError> {
    let m = l.rows() as u32;
    let n = l.cols() as u32;
    let precision = Rational::new(One::one(), pow2(GROWTH_PRECISION_BITS));
    q_list
        .iter()
        .map(|&q| {
            if q < 2 {
                return Err(SumsError::InvalidBox);
            }
            let s = sum_reciprocal_fractional(&SumSpec::cube(l.clone(), q, precision.clone()))?;
            let qn = Rational::from_integer(BigInt::from(q).pow(n));
            let ls = log_star_interval(&int(q as i64), 64).expect("q positive");
            let col = |e: u32| ls.powi(e).scale(&qn).recip().mul(&s.interval());
            Ok(GrowthRow {
                q,
                lower_column: col(m),
                upper_column: col(2 * m + n - 2),
                s,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct GrowthCsvRow {
    #[serde(rename = "Q")]
    q: u64,
    #[serde(rename = "S_lower")]
    s_lower: String,
    #[serde(rename = "S_upper")]
    s_upper: String,
    ratio_lower_bound_column: f64,
    ratio_upper_bound_column: f64,
}

/// CSV with exact `S` bounds and decimal midpoints of both ratio columns.
pub fn write_growth_csv<W: Write>(rows: &[GrowthRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(GrowthCsvRow {
            q: r.q,
            s_lower: format_rational(&r.s.lower),
            s_upper: format_rational(&r.s.upper),
            ratio_lower_bound_column: to_f64(&r.lower_column.midpoint()),
            ratio_upper_bound_column: to_f64(&r.upper_column.midpoint()),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// `max / min` of the midpoints of a ratio column.
pub fn column_spread(col: &[Interval]) -> f64 {
    let vals: Vec<f64> = col.iter().map(|c| to_f64(&c.midpoint())).collect();
    let max = vals.iter().cloned().fold(f64::MIN, f64::max);
    let min = vals.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

/// Positive non-increasing step function: `φ(x) = value` of the last step
/// whose start is `<= x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepFunction {
    steps: Vec<(u64, Rational)>,
}

impl StepFunction {
    pub fn new(steps: Vec<(u64, Rational)>) -> Result<Self, SumsError> {
        let bad = |s: &str| Err(SumsError::InvalidStep(s.into()));
        if steps.first().map(|s| s.0) != Some(1) {
            return bad("the first step must start at 1");
        }
        for w in steps.windows(2) {
            if w[1].0 <= w[0].0 {
                return bad("step starts must increase");
            }
            if w[1].1 > w[0].1 {
                return bad("values must be non-increasing");
            }
        }
        if steps.iter().any(|s| !s.1.is_positive()) {
            return bad("values must be positive");
        }
        Ok(StepFunction { steps })
    }

    pub fn constant(v: Rational) -> Result<Self, SumsError> {
        Self::new(vec![(1, v)])
    }

    pub fn eval(&self, x: u64) -> &Rational {
        let idx = self.steps.partition_point(|s| s.0 <= x) - 1;
        &self.steps[idx].1
    }

    pub fn scaled(&self, k: &Rational) -> Self {
        StepFunction {
            steps: self.steps.iter().map(|(a, v)| (*a, v * k)).collect(),
        }
    }
}

/// Exact `min_{0 < |q| <= Q_max} |q|^n prod_i ||L_i q|| / φ(|q|)` and a
/// minimiser (smallest shell, then lexicographic).
pub fn semimult_margin(l: &Matrix, phi: &StepFunction, q_max: u64) -> (Rational, IntVector) {
    let n = l.cols() as u32;
    let box_q = vec![q_max; l.cols()];
    (1..=q_max)
        .into_par_iter()
        .flat_map_iter(|s| {
            let scale = Rational::from_integer(BigInt::from(s).pow(n)) / phi.eval(s);
            shell(&box_q, s).into_iter().map(move |q| {
                let d = (0..l.rows()).fold(Rational::one(), |acc, i| acc * dist_nearest_int(&l.row_dot(i, &q)));
                (&scale * d, q)
            })
        })
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| shell_order(&a.1, &b.1)))
        .expect("q_max >= 1")
}

/// `φ(x) = c / log*(x^n)^λ`, rounded down at every integer `x <= x_max`.
pub fn log_decay_steps(c: &Rational, n: u32, lambda: u32, x_max: u64) -> StepFunction {
    let steps = (1..=x_max)
        .map(|x| {
            let arg = Rational::from_integer(BigInt::from(x).pow(n));
            let up = log_star_interval(&arg, 48).expect("positive").hi;
            (x, c / (0..lambda).fold(Rational::one(), |acc, _| acc * &up))
        })
        .collect::<Vec<_>>();
    // monotone by construction up to rounding; enforce it
    let mut out: Vec<(u64, Rational)> = Vec::with_capacity(steps.len());
    for (x, v) in steps {
        let v = match out.last() {
            Some((_, prev)) if &v > prev => prev.clone(),
            _ => v,
        };
        out.push((x, v));
    }
    StepFunction::new(out).expect("valid by construction")
}

pub fn q_list_to_string(q: &[u64]) -> String {
    q.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn l1(x: Rational) -> Matrix {
        Matrix::filled(1, 1, x)
    }

    #[test]
    fn exact_examples() {
        let s = sum_reciprocal_fractional(&SumSpec::exact(l1(ratio(1, 2)), vec![1])).unwrap();
        assert_eq!(s.lower, int(4));
        assert!(s.is_exact());
        let s = sum_reciprocal_fractional(&SumSpec::exact(l1(ratio(1, 4)), vec![3])).unwrap();
        assert_eq!(s.lower, int(20));
        let e = sum_reciprocal_fractional(&SumSpec::exact(l1(ratio(1, 2)), vec![2])).unwrap_err();
        assert_eq!(e, SumsError::DivergentTerm { q: IntVector(vec![2]), row: 0 });
        let mut spec = SumSpec::exact(l1(ratio(1, 2)), vec![2]);
        spec.use_symmetry = false;
        assert_eq!(sum_reciprocal_fractional(&spec).unwrap_err(), e);
    }

    #[test]
    fn symmetry_and_order_do_not_matter() {
        let l = Matrix::from_rows(vec![vec![ratio(3, 7), ratio(2, 11)]]).unwrap();
        let mut spec = SumSpec::exact(l.clone(), vec![5, 4]);
        let a = sum_reciprocal_fractional(&spec).unwrap();
        spec.use_symmetry = false;
        let b = sum_reciprocal_fractional(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lower, sum_reciprocal_naive(&l, &[5, 4]).unwrap());
        spec.precision = ratio(1, 1000);
        let c = sum_reciprocal_fractional(&spec).unwrap();
        spec.use_symmetry = true;
        let d = sum_reciprocal_fractional(&spec).unwrap();
        assert_eq!(c, d);
        assert!(c.lower <= a.lower && a.lower <= c.upper && c.width() <= ratio(1, 1000));
    }

    #[test]
    fn shells_partition_the_box() {
        let b = [3u64, 2];
        let all: usize = (1..=3).map(|s| shell(&b, s).len()).sum();
        assert_eq!(all, 7 * 5 - 1);
        assert!(shell(&b, 3).iter().all(|q| q.sup_norm() == 3));
    }

    #[test]
    fn growth_rows_and_monotonicity() {
        let l = Matrix::from_rows(vec![vec![ratio(13, 31), ratio(7, 29)]]).unwrap();
        let rows = growth_table(&l, &[2, 4, 8]).unwrap();
        assert_eq!(rows.len(), 3);
        for w in rows.windows(2) {
            assert!(w[1].s.lower >= &w[0].s.upper - ratio(1, 512));
        }
        let mut buf = Vec::new();
        write_growth_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("Q,S_lower,S_upper,ratio_lower_bound_column,ratio_upper_bound_column"));
    }

    #[test]
    fn margins() {
        let l = Matrix::from_rows(vec![vec![ratio(1, 3), ratio(1, 5)]]).unwrap();
        let one = StepFunction::constant(int(1)).unwrap();
        let (m, q) = semimult_margin(&l, &one, 5);
        assert_eq!(m, int(0));
        assert_eq!(q, IntVector(vec![-3, 0]));
        let l = Matrix::from_rows(vec![vec![ratio(3, 7), ratio(2, 11)]]).unwrap();
        let (a, qa) = semimult_margin(&l, &one, 4);
        let (b, qb) = semimult_margin(&l, &one.scaled(&ratio(1, 2)), 4);
        assert_eq!(b, a * int(2));
        assert_eq!(qa, qb);
        assert!(StepFunction::new(vec![(1, int(1)), (3, int(2))]).is_err());
    }
}
