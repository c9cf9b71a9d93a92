//! Brute-force oracles for the counting lemmas behind the construction, with
//! the closed-form bounds they are checked against.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cantor::{self, Adversary, CantorScheme};
use crate::construction::config::{danger_radius_upper, enumerate_band};
use crate::construction::geometry::{candidate_points, cube_meets_danger, rows_meet_hyperbolic, Cube, DangerPoint};
use crate::diophantine::transcendental::{cmp_e_power, exp_bounds, ln_bounds, log_star_interval, LogBounds};
use crate::diophantine::{prod_plus, IntVector, Matrix};
use crate::rational::{format_rational, int, ratio, to_f64, Interval, Rational};

const BITS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("both points share the core: p = p'")]
    SameCore,
    #[error("points have different q")]
    DifferentQ,
    #[error("band {k} is empty")]
    EmptyBand { k: usize },
}

/// Grid-counting instance: the hyperbolic set
/// `C = {X : prod_i |X_i q + γ'_i| <= ε, |X_i q + γ'_i| <= T}`, a cube `D`,
/// and the closed tiles of the grid `δ Z^{m x n} + V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypercountInstance {
    pub m: usize,
    pub n: usize,
    pub gamma_prime: Vec<Rational>,
    pub q: IntVector,
    pub epsilon: Rational,
    pub t: Rational,
    pub delta: Rational,
    pub v: Matrix,
    pub d: Cube,
}

impl HypercountInstance {
    pub fn validate(&self) -> Result<(), OracleError> {
        let bad = |s: &str| Err(OracleError::PreconditionViolated(s.to_string()));
        if self.q.len() != self.n || self.q.is_zero() {
            return bad("q must be a nonzero vector of length n");
        }
        if self.gamma_prime.len() != self.m
            || self.v.rows() != self.m
            || self.v.cols() != self.n
            || self.d.rows() != self.m
            || self.d.cols() != self.n
        {
            return bad("shape mismatch");
        }
        if !self.epsilon.is_positive() || !self.t.is_positive() || !self.delta.is_positive() {
            return bad("ε, T and δ must be positive");
        }
        // ε / T^m < e^{-1}  <=>  T^m / ε > e
        let ratio = pow(&self.t, self.m as u32) / &self.epsilon;
        if cmp_e_power(&ratio, 1) != Ordering::Greater {
            return bad("ε / T^m must be below e^-1");
        }
        let rows: Vec<Interval> = (0..self.m)
            .map(|i| self.d.row_range(i, &self.q, &self.gamma_prime[i]))
            .collect();
        if !rows_meet_hyperbolic(&rows, &self.t, &self.epsilon) {
            return bad("D does not meet C");
        }
        Ok(())
    }
}

fn pow(x: &Rational, e: u32) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * x)
}

/// Tile indices `S` along one entry whose closed tile meets `[lo, hi]`.
fn tile_range(lo: &Rational, hi: &Rational, offset: &Rational, delta: &Rational) -> (i64, i64) {
    let first: BigInt = ((lo - offset) / delta).ceil().to_integer() - 1;
    let last = ((hi - offset) / delta).floor().to_integer();
    (first.to_i64().expect("tile index fits"), last.to_i64().expect("tile index fits"))
}

/// Exact number of tiles `τ` with `τ ∩ D ∩ C ≠ ∅`.
///
/// Rows of `X` are independent, so the count factors through per-row lists
/// of `min |X_i q + γ'_i|` over `τ ∩ D`, combined under the product constraint.
pub fn brute_tile_count(inst: &HypercountInstance) -> Result<u64, OracleError> {
    inst.validate()?;
    let per_row: Vec<Vec<Rational>> = (0..inst.m).map(|i| row_minima(inst, i)).collect();
    Ok(count_products(&per_row, &inst.epsilon))
}

fn row_minima(inst: &HypercountInstance, i: usize) -> Vec<Rational> {
    let n = inst.n;
    let edge = &inst.d.edge;
    let ranges: Vec<(i64, i64)> = (0..n)
        .map(|j| {
            let lo = inst.d.origin.get(i, j);
            tile_range(lo, &(lo + edge), inst.v.get(i, j), &inst.delta)
        })
        .collect();
    let mut out = Vec::new();
    let mut s: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        // value range of X_i q + γ'_i over the box τ_i ∩ D_i
        let mut lo = inst.gamma_prime[i].clone();
        let mut hi = lo.clone();
        for j in 0..n {
            let dlo = inst.d.origin.get(i, j);
            let dhi = dlo + edge;
            let tlo = &inst.delta * int(s[j]) + inst.v.get(i, j);
            let thi = &tlo + &inst.delta;
            let a = std::cmp::max(tlo, dlo.clone());
            let b = std::cmp::min(thi, dhi);
            debug_assert!(a <= b);
            let qj = int(inst.q.0[j]);
            let (x, y) = (&a * &qj, &b * &qj);
            if x <= y {
                lo += x;
                hi += y;
            } else {
                lo += y;
                hi += x;
            }
        }
        let clo = std::cmp::max(lo, -inst.t.clone());
        let chi = std::cmp::min(hi, inst.t.clone());
        if clo <= chi {
            let min = if !clo.is_positive() && !chi.is_negative() {
                Rational::zero()
            } else {
                std::cmp::min(clo.abs(), chi.abs())
            };
            out.push(min);
        }
        let mut j = n;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if s[j] < ranges[j].1 {
                s[j] += 1;
                break;
            }
            s[j] = ranges[j].0;
        }
    }
}

/// Number of tuples, one entry per row list, whose product is `<= eps`.
fn count_products(rows: &[Vec<Rational>], eps: &Rational) -> u64 {
    let (last, init) = rows.split_last().expect("at least one row");
    let mut sorted = last.clone();
    sorted.sort();
    fn rec(init: &[Vec<Rational>], prod: Rational, eps: &Rational, last: &[Rational]) -> u64 {
        match init.split_first() {
            Some((row, rest)) => row.iter().map(|x| rec(rest, &prod * x, eps, last)).sum(),
            None => {
                if prod.is_zero() {
                    last.len() as u64
                } else {
                    let cap = eps / prod;
                    last.partition_point(|x| *x <= cap) as u64
                }
            }
        }
    }
    rec(init, Rational::one(), eps, &sorted)
}

/// Certified enclosure of
/// `2^{2m-1} A / |q|^m · log*((T + n|q|δ)^m / A)^{m-1} · (edge(D) + 2δ)^{m(n-1)}`
/// with `A = ε + (T + n|q|δ)^m - T^m`.
pub fn hypercount_bound(inst: &HypercountInstance) -> Result<LogBounds, OracleError> {
    inst.validate()?;
    let m = inst.m as u32;
    let qn = int(inst.q.sup_norm() as i64);
    let grown = pow(&(&inst.t + int(inst.n as i64) * &qn * &inst.delta), m);
    let a = &inst.epsilon + &grown - pow(&inst.t, m);
    let base = int(1i64 << (2 * m - 1)) * &a / pow(&qn, m)
        * pow(&(&inst.d.edge + int(2) * &inst.delta), m * (inst.n as u32 - 1));
    if m == 1 {
        let p = Rational::zero();
        return Ok(LogBounds::exact(base, p));
    }
    let ls = log_star_interval(&(grown / &a), BITS).expect("positive argument").powi(m - 1);
    let iv = ls.scale(&base);
    let w = iv.width();
    Ok(LogBounds::from_interval(iv, w))
}

/// Rational upper bound on `sqrt(v)`, exact when `v` is a perfect square.
pub fn sqrt_upper(v: &BigUint) -> Rational {
    let (r, exact) = crate::rational::isqrt(v);
    if exact {
        return Rational::from_integer(r.into());
    }
    let scale = BigUint::one() << 64usize;
    let (s, _) = crate::rational::isqrt(&(v * &scale * &scale));
    Rational::new((s + 1u32).into(), scale.into())
}

/// Certified lower bound `max_i |p_i - p'_i| / (sqrt(n) |q|_2)` on the
/// sup-distance between the cores of two danger sets with the same `q`.
pub fn hyperplane_separation(a: &DangerPoint, b: &DangerPoint) -> Result<Rational, OracleError> {
    if a.q != b.q {
        return Err(OracleError::DifferentQ);
    }
    if a.p == b.p {
        return Err(OracleError::SameCore);
    }
    let dp = a.p.iter().zip(&b.p).map(|(x, y)| (x - y).unsigned_abs()).max().unwrap_or(0);
    let n = a.q.len() as u64;
    let norm2: BigUint = a.q.0.iter().map(|&x| BigUint::from(x.unsigned_abs()).pow(2)).sum();
    let root = sqrt_upper(&(norm2 * n));
    let lower = Rational::from_integer(BigInt::from(dp)) / root;
    debug_assert!(lower >= Rational::new(One::one(), BigInt::from(n * a.q.sup_norm())));
    Ok(lower)
}

/// True sup-distance between the cores: `max_i |p_i - p'_i| / |q|_1`.
pub fn core_sup_distance(a: &DangerPoint, b: &DangerPoint) -> Rational {
    let dp = a.p.iter().zip(&b.p).map(|(x, y)| (x - y).unsigned_abs()).max().unwrap_or(0);
    let l1: u64 = a.q.0.iter().map(|x| x.unsigned_abs()).sum();
    Rational::new(BigInt::from(dp), BigInt::from(l1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceCheck {
    pub brute: u64,
    pub bound: Rational,
    pub pass: bool,
}

/// `2^{D-m} binom(D, m)`: number of `m`-dimensional faces of a `D`-cube.
pub fn face_count(dim: u32, m: u32) -> BigInt {
    let mut binom = BigInt::one();
    for i in 0..m {
        binom = binom * BigInt::from(dim - i) / BigInt::from(i + 1);
    }
    binom << (dim - m) as usize
}

/// Counts danger points with the given `q` whose set meets `J`, against
/// `faces(mn, m) (edge(J) + (1 + 2n sqrt(m)) / (n|q|))^m (n|q|)^m`.
pub fn face_count_bound_check(j: &Cube, q: &IntVector, gamma: &[Rational], c: &Rational) -> FaceCheck {
    let m = j.rows();
    let n = j.cols();
    let lambda = (m + n - 1) as u32;
    let eps = danger_radius_upper(c, lambda, prod_plus(q));
    let brute = candidate_points(j, q, gamma)
        .iter()
        .filter(|p| cube_meets_danger(j, p, gamma, &eps))
        .count() as u64;
    let nq = int((n as u64 * q.sup_norm()) as i64);
    let sqrt_m = sqrt_upper(&BigUint::from(m));
    let widened = &j.edge + (int(1) + int(2 * n as i64) * sqrt_m) / &nq;
    let faces = Rational::from_integer(face_count((m * n) as u32, m as u32));
    let bound = faces * pow(&widened, m as u32) * pow(&nq, m as u32);
    FaceCheck {
        brute,
        pass: int(brute as i64) <= bound,
        bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandExponent {
    /// `prod_plus(q)^{-1}`
    MinusOne,
    /// `prod_plus(q)^{-1-m/n}`
    MinusOneMinusRatio { m: usize },
}

/// Sum of `prod_plus(q)^{exponent}` over band `k`. Exact whenever every term
/// is rational (`n | m`); otherwise a certified enclosure.
pub fn band_sum(n: usize, r: u64, k: usize, exponent: BandExponent) -> Result<LogBounds, OracleError> {
    let band = enumerate_band(n, r, k);
    if band.is_empty() {
        return Err(OracleError::EmptyBand { k });
    }
    let mut by_height: BTreeMap<u128, i64> = BTreeMap::new();
    for q in &band {
        *by_height.entry(prod_plus(q)).or_default() += 1;
    }
    let mut lo = Rational::zero();
    let mut hi = Rational::zero();
    for (&p, &count) in &by_height {
        let pr = Rational::from_integer(BigInt::from(p));
        let base = int(count) / &pr;
        match exponent {
            BandExponent::MinusOne => {
                lo += &base;
                hi += &base;
            }
            BandExponent::MinusOneMinusRatio { m } => {
                if m % n == 0 {
                    let t = &base / pow(&pr, (m / n) as u32);
                    lo += &t;
                    hi += &t;
                } else {
                    let e = Rational::new(BigInt::from(m), BigInt::from(n));
                    let ln = ln_bounds(&pr, BITS).expect("height is positive");
                    // p^{-m/n} = exp(-(m/n) ln p), decreasing in ln p
                    lo += &base * exp_bounds(&-(&e * &ln.hi), BITS).lo;
                    hi += &base * exp_bounds(&-(&e * &ln.lo), BITS).hi;
                }
            }
        }
    }
    let w = &hi - &lo;
    Ok(LogBounds::from_interval(Interval::new(lo, hi), w))
}

/// Independent re-summation by filtering a full `|q|_inf` box.
pub fn band_sum_brute(n: usize, r: u64, k: usize) -> Rational {
    let r3 = |e: usize| BigUint::from(r).pow(e as u32);
    let lo = r3(k);
    let hi = r3(k + 1);
    let top = crate::construction::config::max_height_below(r, k + 1) as i64;
    let mut sum = Rational::zero();
    let side = (2 * top + 1) as u64;
    let total = side.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let q: Vec<i64> = (0..n)
            .map(|_| {
                let d = (c % side) as i64 - top;
                c /= side;
                d
            })
            .collect();
        let q = IntVector(q);
        if q.is_zero() {
            continue;
        }
        let p = prod_plus(&q);
        let p3 = BigUint::from(p).pow(3);
        if lo <= p3 && p3 < hi {
            sum += Rational::new(One::one(), BigInt::from(p));
        }
    }
    sum
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandGrowthRow {
    pub k: usize,
    pub sum: Rational,
    /// Enclosure of `sum / (log*(F(k+1))^{n-1} log*(F(k+1)/F(k)))`.
    pub ratio: Interval,
}

pub fn band_growth_ratios(n: usize, r: u64, k_max: usize) -> Vec<BandGrowthRow> {
    let third = ln_bounds(&int(r as i64), BITS)
        .expect("R positive")
        .scale(&ratio(1, 3));
    let step = third.max_with(&int(1));
    (0..=k_max)
        .filter_map(|k| {
            let sum = band_sum(n, r, k, BandExponent::MinusOne).ok()?.lower;
            let top = third.scale(&int(k as i64 + 1)).max_with(&int(1));
            let denom = top.powi((n - 1) as u32).mul(&step);
            Some(BandGrowthRow {
                k,
                ratio: denom.recip().scale(&sum),
                sum,
            })
        })
        .collect()
}

/// One line of an oracle CSV report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub suite: &'static str,
    pub trial: usize,
    pub instance: String,
    pub brute: String,
    pub bound: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteReport {
    pub rows: Vec<OracleRow>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_q<R: Rng>(rng: &mut R, n: usize, max: i64) -> IntVector {
    loop {
        let q = IntVector((0..n).map(|_| rng.gen_range(-max..=max)).collect());
        if !q.is_zero() {
            return q;
        }
    }
}

fn random_ratio<R: Rng>(rng: &mut R, num: std::ops::RangeInclusive<i64>, den: std::ops::RangeInclusive<i64>) -> Rational {
    ratio(rng.gen_range(num), rng.gen_range(den))
}

fn describe_matrix(x: &Matrix) -> String {
    x.entries().iter().map(format_rational).collect::<Vec<_>>().join(" ")
}

/// The instance where the bound is attained with equality.
pub fn equality_instance() -> HypercountInstance {
    HypercountInstance {
        m: 1,
        n: 1,
        gamma_prime: vec![int(0)],
        q: IntVector(vec![1]),
        epsilon: ratio(1, 10),
        t: ratio(1, 2),
        delta: ratio(1, 20),
        v: Matrix::filled(1, 1, int(0)),
        d: Cube::new(Matrix::filled(1, 1, int(-1)), int(2)),
    }
}

/// Random instance with `m, n ∈ {1,2,3}`, `|q| <= 5`, and `D` centred on a
/// point of the core so that `D ∩ C ≠ ∅`.
pub fn random_hypercount_instance<R: Rng>(rng: &mut R) -> HypercountInstance {
    loop {
        let m = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=3);
        let q = random_q(rng, n, 5);
        let delta = random_ratio(rng, 1..=1, 8..=40);
        let tiles = rng.gen_range(1..=3);
        let edge = &delta * int(tiles) + random_ratio(rng, 0..=3, 7..=11) * &delta;
        let origin = Matrix::from_rows(
            (0..m)
                .map(|_| (0..n).map(|_| random_ratio(rng, -20..=20, 7..=13)).collect())
                .collect(),
        )
        .expect("rectangular");
        let d = Cube::new(origin, edge);
        let centre = d.center();
        // shift so the core passes near the centre of D
        let gamma_prime: Vec<Rational> = (0..m)
            .map(|i| -centre.row_dot(i, &q) + random_ratio(rng, -2..=2, 50..=100))
            .collect();
        let t = random_ratio(rng, 1..=3, 4..=6);
        let tm = pow(&t, m as u32);
        let epsilon = &tm * random_ratio(rng, 1..=30, 100..=100);
        let v = Matrix::from_rows(
            (0..m)
                .map(|_| (0..n).map(|_| random_ratio(rng, -5..=5, 13..=17) * &delta).collect())
                .collect(),
        )
        .expect("rectangular");
        let inst = HypercountInstance {
            m,
            n,
            gamma_prime,
            q,
            epsilon,
            t,
            delta,
            v,
            d,
        };
        if inst.validate().is_ok() {
            return inst;
        }
    }
}

fn hypercount_row(trial: usize, inst: &HypercountInstance) -> OracleRow {
    let count = brute_tile_count(inst).expect("validated instance");
    let bound = hypercount_bound(inst).expect("validated instance");
    let lhs = pow(&inst.delta, (inst.m * inst.n) as u32) * int(count as i64);
    OracleRow {
        suite: "hypercount",
        trial,
        instance: format!(
            "m={} n={} q={} eps={} T={} delta={} edge={} gamma'={} D0=[{}]",
            inst.m,
            inst.n,
            inst.q,
            format_rational(&inst.epsilon),
            format_rational(&inst.t),
            format_rational(&inst.delta),
            format_rational(&inst.d.edge),
            inst.gamma_prime.iter().map(format_rational).collect::<Vec<_>>().join(" "),
            describe_matrix(&inst.d.origin)
        ),
        brute: format!("{count} tiles, lhs {}", format_rational(&lhs)),
        bound: format!("{:.6e}", to_f64(&bound.upper)),
        pass: lhs <= bound.upper,
    }
}

/// The equality instance followed by `trials` random instances.
pub fn hypercount_suite(trials: usize, seed: u64) -> SuiteReport {
    let mut rows = vec![hypercount_row(0, &equality_instance())];
    rows.extend((1..=trials).into_par_iter().map(|t| {
        let inst = random_hypercount_instance(&mut trial_rng(seed, t));
        hypercount_row(t, &inst)
    }).collect::<Vec<_>>());
    SuiteReport { rows }
}

/// Random same-`q` pairs; each must satisfy both
/// `separation >= 1/(n|q|)` and `separation <= true sup-distance`.
pub fn separation_suite(trials: usize, seed: u64) -> SuiteReport {
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let rng = &mut trial_rng(seed, t);
            let m = rng.gen_range(1..=3);
            let n = rng.gen_range(1..=3);
            let q = random_q(rng, n, 5);
            let p: Vec<i64> = (0..m).map(|_| rng.gen_range(-6..=6)).collect();
            let mut p2 = p.clone();
            while p2 == p {
                p2 = (0..m).map(|_| rng.gen_range(-6..=6)).collect();
            }
            let a = DangerPoint::new(p, q.clone());
            let b = DangerPoint::new(p2, q.clone());
            let sep = hyperplane_separation(&a, &b).expect("distinct cores");
            let floor = Rational::new(One::one(), BigInt::from(n as u64 * q.sup_norm()));
            let exact = core_sup_distance(&a, &b);
            OracleRow {
                suite: "separation",
                trial: t,
                instance: format!("{a} vs {b}"),
                brute: format_rational(&exact),
                bound: format_rational(&sep),
                pass: sep >= floor && sep <= exact,
            }
        })
        .collect();
    SuiteReport { rows }
}

pub fn faces_suite(trials: usize, seed: u64) -> SuiteReport {
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let rng = &mut trial_rng(seed, t);
            let m = rng.gen_range(1..=2);
            let n = rng.gen_range(if m == 1 { 2 } else { 1 }..=2);
            let q = random_q(rng, n, 6);
            let edge = random_ratio(rng, 1..=1, 2..=16);
            let origin = Matrix::from_rows(
                (0..m)
                    .map(|_| (0..n).map(|_| random_ratio(rng, 0..=20, 20..=20)).collect())
                    .collect(),
            )
            .expect("rectangular");
            let gamma: Vec<Rational> = (0..m)
                .map(|_| if rng.gen_bool(0.5) { int(0) } else { random_ratio(rng, 0..=9, 10..=10) })
                .collect();
            let c = random_ratio(rng, 1..=9, 100..=100);
            let j = Cube::new(origin, edge);
            let check = face_count_bound_check(&j, &q, &gamma, &c);
            OracleRow {
                suite: "faces",
                trial: t,
                instance: format!(
                    "m={m} n={n} q={q} edge={} J0=[{}] c={}",
                    format_rational(&j.edge),
                    describe_matrix(&j.origin),
                    format_rational(&c)
                ),
                brute: check.brute.to_string(),
                bound: format!("{:.6}", to_f64(&check.bound)),
                pass: check.pass,
            }
        })
        .collect();
    SuiteReport { rows }
}

/// Exact band sums against an independent box filter, for random `(n, R, k)`.
pub fn bands_suite(trials: usize, seed: u64) -> SuiteReport {
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let rng = &mut trial_rng(seed, t);
            let n = rng.gen_range(1..=3);
            let r = [2u64, 3, 4, 8, 27][rng.gen_range(0..5)];
            let k_cap = match n {
                1 => 9,
                2 => 6,
                _ => 3,
            };
            let k = rng.gen_range(0..=k_cap);
            let brute = band_sum_brute(n, r, k);
            let (value, pass) = match band_sum(n, r, k, BandExponent::MinusOne) {
                Ok(b) => (format_rational(&b.lower), b.is_exact() && b.lower == brute),
                Err(OracleError::EmptyBand { .. }) => ("empty".to_string(), brute.is_zero()),
                Err(e) => (e.to_string(), false),
            };
            OracleRow {
                suite: "bands",
                trial: t,
                instance: format!("n={n} R={r} k={k}"),
                brute: format_rational(&brute),
                bound: value,
                pass,
            }
        })
        .collect();
    SuiteReport { rows }
}

/// Random one-dimensional scheme with `R_k <= 4`, depth `<= 6`, random anchors
/// and integer removal caps.
pub fn random_cantor_scheme<R: Rng>(rng: &mut R) -> (CantorScheme, usize) {
    let depth = rng.gen_range(1..=6);
    let splits: Vec<u64> = (0..depth).map(|_| rng.gen_range(2..=4)).collect();
    let anchors: Vec<usize> = (0..depth).map(|k| rng.gen_range(0..=k)).collect();
    let removals: Vec<Rational> = splits.iter().map(|&s| int(rng.gen_range(0..=s as i64))).collect();
    let scheme = CantorScheme::new(1, int(1), splits, removals, anchors).expect("valid by construction");
    (scheme, depth)
}

pub fn cantor_suite(trials: usize, seed: u64) -> SuiteReport {
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let rng = &mut trial_rng(seed, t);
            let (scheme, depth) = random_cantor_scheme(rng);
            let positive = cantor::t_sequence(&scheme, depth - 1).is_ok_and(|s| s.all_positive());
            let mut pass = true;
            let mut finals = Vec::new();
            for adversary in [Adversary::Greedy, Adversary::Random] {
                let run = cantor::explicit_construction(&scheme, depth, adversary, rng).expect("small scheme");
                let last = *run.counts.last().expect("counts include J_0");
                pass &= run.counting_inequality_holds && (!positive || last > 0);
                finals.push(last);
            }
            OracleRow {
                suite: "cantor",
                trial: t,
                instance: format!(
                    "R={:?} h={:?} r={:?}",
                    scheme.splits,
                    scheme.anchors,
                    scheme.removals.iter().map(format_rational).collect::<Vec<_>>()
                ),
                brute: format!("#J_K greedy={} random={}", finals[0], finals[1]),
                bound: format!("all t_k > 0: {positive}"),
                pass,
            }
        })
        .collect();
    SuiteReport { rows }
}

/// Random scheme whose removals fill a random fraction of the non-emptiness
/// budget, up to depth 12.
pub fn random_induction_scheme<R: Rng>(rng: &mut R) -> CantorScheme {
    const DEPTH: usize = 13;
    let l = rng.gen_range(2..=3);
    let r = rng.gen_range(2..=6u64);
    let divisor = rng.gen_range(1..=9usize);
    let anchors: Vec<usize> = (0..DEPTH).map(|k| k / divisor).collect();
    let zero = CantorScheme::new(l, int(1), vec![r; DEPTH], vec![int(0); DEPTH], anchors.clone())
        .expect("valid by construction");
    let budgets = cantor::check_nonempty_bound(&zero, DEPTH - 1).expect("depth available");
    let removals = budgets
        .iter()
        .map(|row| &row.budget * random_ratio(rng, 0..=64, 64..=64))
        .collect();
    CantorScheme::new(l, int(1), vec![r; DEPTH], removals, anchors).expect("valid by construction")
}

pub fn induction_suite(trials: usize, seed: u64) -> SuiteReport {
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let rng = &mut trial_rng(seed, t);
            let scheme = random_induction_scheme(rng);
            let checks = cantor::t_lower_bound_check(&scheme, 12);
            let t_seq = cantor::t_sequence(&scheme, 12);
            let t0_ok = t_seq
                .as_ref()
                .is_ok_and(|s| s.0[0] == Rational::from_integer(scheme.cells(0)) - &scheme.removals[0]);
            let pass = t0_ok && checks.as_ref().is_ok_and(|v| v.iter().all(|&b| b));
            OracleRow {
                suite: "induction",
                trial: t,
                instance: format!("l={} R={} h_12={}", scheme.l, scheme.splits[0], scheme.anchors[12]),
                brute: match &t_seq {
                    Ok(s) => format!("t_12 ~ {:.4}", to_f64(&s.0[12])),
                    Err(e) => e.to_string(),
                },
                bound: "t_k >= R^l (1 - 1/max(2,k))".into(),
                pass,
            }
        })
        .collect();
    SuiteReport { rows }
}

/// Runs a suite by name.
pub fn run_suite(name: &str, trials: usize, seed: u64) -> Option<SuiteReport> {
    Some(match name {
        "hypercount" => hypercount_suite(trials, seed),
        "separation" => separation_suite(trials, seed),
        "faces" => faces_suite(trials, seed),
        "bands" => bands_suite(trials, seed),
        "cantor" => cantor_suite(trials, seed),
        "induction" => induction_suite(trials, seed),
        _ => return None,
    })
}

pub const SUITES: [&str; 6] = ["hypercount", "separation", "faces", "bands", "cantor", "induction"];

#[cfg(test)]
mod tests {
    use super::*;

    fn interval_cube(lo: Rational, hi: Rational) -> Cube {
        let e = &hi - &lo;
        Cube::new(Matrix::filled(1, 1, lo), e)
    }

    #[test]
    fn equality_instance_is_tight() {
        let inst = equality_instance();
        assert_eq!(brute_tile_count(&inst).unwrap(), 6);
        let b = hypercount_bound(&inst).unwrap();
        assert!(b.is_exact());
        assert_eq!(b.upper, ratio(3, 10));
        assert_eq!(ratio(1, 20) * int(6), b.upper);
    }

    #[test]
    fn second_bound_example() {
        // 2 (ε + (T + |q|δ) - T) / |q| with n|q|δ = 1/10
        let mut inst = equality_instance();
        inst.q = IntVector(vec![2]);
        assert_eq!(hypercount_bound(&inst).unwrap().upper, ratio(1, 5));
    }

    #[test]
    fn third_bound_example() {
        let inst = HypercountInstance {
            m: 2,
            n: 1,
            gamma_prime: vec![int(0), int(0)],
            q: IntVector(vec![3]),
            epsilon: ratio(1, 100),
            t: ratio(1, 2),
            delta: ratio(1, 100),
            v: Matrix::filled(2, 1, int(0)),
            d: Cube::new(Matrix::filled(2, 1, int(0)), ratio(1, 10)),
        };
        let b = hypercount_bound(&inst).unwrap();
        // 8 · (409/10000) / 9 · ln(2809/409), ln(6.8679...) = 1.92685...
        let lo = ratio(70050, 1_000_000);
        let hi = ratio(70055, 1_000_000);
        assert!(b.lower > lo && b.upper < hi, "{}", to_f64(&b.lower));
    }

    #[test]
    fn precondition_rejects_large_epsilon() {
        let mut inst = equality_instance();
        inst.epsilon = ratio(1, 5); // ε / T = 2/5 > 1/e
        assert!(matches!(brute_tile_count(&inst), Err(OracleError::PreconditionViolated(_))));
    }

    #[test]
    fn single_interior_tile() {
        let mut inst = equality_instance();
        inst.d = interval_cube(ratio(1, 100), ratio(2, 100));
        assert_eq!(brute_tile_count(&inst).unwrap(), 1);
    }

    #[test]
    fn separation_examples() {
        let q = IntVector(vec![1, 2]);
        let s = hyperplane_separation(&DangerPoint::new(vec![0], q.clone()), &DangerPoint::new(vec![1], q.clone())).unwrap();
        // 1/sqrt(10) = 0.316227...
        assert!(s <= ratio(316228, 1_000_000) && s > ratio(316227, 1_000_000));
        assert!(s >= ratio(1, 4));
        assert_eq!(core_sup_distance(&DangerPoint::new(vec![0], q.clone()), &DangerPoint::new(vec![1], q.clone())), ratio(1, 3));
        let q3 = IntVector(vec![1, 0, 0]);
        let s = hyperplane_separation(&DangerPoint::new(vec![0], q3.clone()), &DangerPoint::new(vec![2], q3.clone())).unwrap();
        assert!(s >= ratio(1, 3) && s <= ratio(2, 1) / sqrt_upper(&BigUint::from(3u32)) + ratio(1, 1 << 30));
        assert_eq!(
            hyperplane_separation(&DangerPoint::new(vec![1], q.clone()), &DangerPoint::new(vec![1], q)),
            Err(OracleError::SameCore)
        );
    }

    #[test]
    fn face_examples() {
        let j = Cube::new(Matrix::filled(1, 2, ratio(1, 4)), ratio(1, 4));
        let q = IntVector(vec![1, 1]);
        let a = face_count_bound_check(&j, &q, &[int(0)], &ratio(1, 100));
        assert!(a.pass);
        let b = face_count_bound_check(&j, &q.negated(), &[int(0)], &ratio(1, 100));
        assert_eq!((a.brute, &a.bound), (b.brute, &b.bound));
        assert_eq!(face_count(2, 1), BigInt::from(4));
        assert_eq!(face_count(3, 1), BigInt::from(12));
    }

    #[test]
    fn band_sum_examples() {
        let s = band_sum(2, 27, 0, BandExponent::MinusOne).unwrap();
        assert_eq!(s.lower, int(14));
        let s = band_sum(1, 27, 1, BandExponent::MinusOne).unwrap();
        assert_eq!(s.lower, ratio(341, 140));
        let s = band_sum(1, 27, 0, BandExponent::MinusOneMinusRatio { m: 1 }).unwrap();
        assert!(s.is_exact());
        assert_eq!(s.lower, ratio(5, 2));
        let s = band_sum(2, 27, 0, BandExponent::MinusOneMinusRatio { m: 1 }).unwrap();
        assert!(!s.is_exact() && s.lower < s.upper);
        assert_eq!(band_sum_brute(2, 27, 0), int(14));
    }

    #[test]
    fn suites_are_green_and_reproducible() {
        for name in SUITES {
            let a = run_suite(name, 12, 7).unwrap();
            assert_eq!(a.failures(), 0, "{name}: {:?}", a.rows.iter().find(|r| !r.pass));
            assert_eq!(a, run_suite(name, 12, 7).unwrap());
        }
        let mut buf = Vec::new();
        run_suite("bands", 3, 1).unwrap().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }

    #[test]
    fn brute_agrees_with_direct_tile_scan() {
        // independent check: enumerate tiles and test each one as a box
        let mut rng = trial_rng(99, 0);
        for _ in 0..20 {
            let inst = random_hypercount_instance(&mut rng);
            if inst.m * inst.n > 4 {
                continue;
            }
            let fast = brute_tile_count(&inst).unwrap();
            let mut slow = 0;
            let ranges: Vec<(i64, i64)> = (0..inst.m * inst.n)
                .map(|e| {
                    let (i, j) = (e / inst.n, e % inst.n);
                    let lo = inst.d.origin.get(i, j);
                    tile_range(lo, &(lo + &inst.d.edge), inst.v.get(i, j), &inst.delta)
                })
                .collect();
            let total: i64 = ranges.iter().map(|r| r.1 - r.0 + 1).product();
            for code in 0..total {
                let mut c = code;
                let mut rows = Vec::new();
                let mut lows = Vec::new();
                let mut highs = Vec::new();
                for (e, r) in ranges.iter().enumerate() {
                    let w = r.1 - r.0 + 1;
                    let s = r.0 + c % w;
                    c /= w;
                    let (i, j) = (e / inst.n, e % inst.n);
                    let tlo = &inst.delta * int(s) + inst.v.get(i, j);
                    let dlo = inst.d.origin.get(i, j).clone();
                    lows.push(std::cmp::max(tlo.clone(), dlo.clone()));
                    highs.push(std::cmp::min(tlo + &inst.delta, dlo + &inst.d.edge));
                }
                for i in 0..inst.m {
                    let mut lo = inst.gamma_prime[i].clone();
                    let mut hi = lo.clone();
                    for j in 0..inst.n {
                        let qj = int(inst.q.0[j]);
                        let a = &lows[i * inst.n + j] * &qj;
                        let b = &highs[i * inst.n + j] * &qj;
                        lo += std::cmp::min(a.clone(), b.clone());
                        hi += std::cmp::max(a, b);
                    }
                    rows.push(Interval::new(lo, hi));
                }
                if rows_meet_hyperbolic(&rows, &inst.t, &inst.epsilon) {
                    slow += 1;
                }
            }
            assert_eq!(fast, slow);
        }
    }
}
