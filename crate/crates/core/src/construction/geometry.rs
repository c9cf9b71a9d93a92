//! Exact predicates on axis-aligned matrix cubes: danger-set intersection,
//! hyperplane intersection, and the integer points `p` that can matter for a
//! given `q`.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::diophantine::{IntVector, Matrix};
use crate::rational::{int, ratio, Interval, Rational};

/// Closed cube `prod_{ij} [origin_ij, origin_ij + edge]` in `R^{m x n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cube {
    pub origin: Matrix,
    pub edge: Rational,
}

impl Cube {
    pub fn new(origin: Matrix, edge: Rational) -> Self {
        debug_assert!(!edge.is_negative());
        Cube { origin, edge }
    }

    /// Degenerate cube consisting of a single point.
    pub fn point(x: Matrix) -> Self {
        Cube {
            origin: x,
            edge: Rational::zero(),
        }
    }

    pub fn rows(&self) -> usize {
        self.origin.rows()
    }

    pub fn cols(&self) -> usize {
        self.origin.cols()
    }

    pub fn center(&self) -> Matrix {
        let half = &self.edge / int(2);
        let mut c = self.origin.clone();
        for v in c.entries_mut() {
            *v += &half;
        }
        c
    }

    pub fn contains_point(&self, x: &Matrix) -> bool {
        self.origin
            .entries()
            .iter()
            .zip(x.entries())
            .all(|(lo, v)| lo <= v && *v <= lo + &self.edge)
    }

    pub fn contains_cube(&self, other: &Cube) -> bool {
        self.origin
            .entries()
            .iter()
            .zip(other.origin.entries())
            .all(|(lo, olo)| lo <= olo && olo + &other.edge <= lo + &self.edge)
    }

    /// Number of children in an `R`-fold split of every edge, `R^{mn}`.
    pub fn child_count(&self, r: u64) -> Option<u64> {
        r.checked_pow(u32::try_from(self.origin.entries().len()).ok()?)
    }

    /// Child `index` of the `R^{mn}` split. Entry `(0,0)` carries the most
    /// significant base-`R` digit, so indices follow lexicographic order of the
    /// digit grid.
    pub fn child(&self, index: u64, r: u64) -> Cube {
        let len = self.origin.entries().len();
        let edge = &self.edge / int(r as i64);
        let mut origin = self.origin.clone();
        let mut rest = index;
        for pos in (0..len).rev() {
            let digit = rest % r;
            rest /= r;
            origin.entries_mut()[pos] += &edge * int(digit as i64);
        }
        debug_assert_eq!(rest, 0, "child index out of range");
        Cube { origin, edge }
    }

    /// Exact range of `X_i q + shift` over the cube.
    pub fn row_range(&self, i: usize, q: &IntVector, shift: &Rational) -> Interval {
        let base = self.origin.row_dot(i, q) + shift;
        let (neg, pos) = q.entries().iter().fold((0i64, 0i64), |(n, p), &x| {
            if x < 0 {
                (n + x, p)
            } else {
                (n, p + x)
            }
        });
        Interval::new(&base + &self.edge * int(neg), base + &self.edge * int(pos))
    }

    /// Exact range of `sum_ij coeff_ij X_ij` over the cube.
    pub fn linear_range(&self, coeff: &Matrix) -> Interval {
        let base = coeff.frobenius_dot(&self.origin);
        let (neg, pos) = coeff.entries().iter().fold(
            (Rational::zero(), Rational::zero()),
            |(n, p), c| {
                if c.is_negative() {
                    (n + c, p)
                } else {
                    (n, p + c)
                }
            },
        );
        Interval::new(&base + &self.edge * neg, base + &self.edge * pos)
    }
}

/// `P = (p, q)`, parameterising the danger set
/// `{X : prod_i |X_i q + gamma_i + p_i| <= eps(q), |X_i q + gamma_i + p_i| <= 1/2}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DangerPoint {
    pub p: Vec<i64>,
    pub q: IntVector,
}

impl DangerPoint {
    pub fn new(p: Vec<i64>, q: IntVector) -> Self {
        DangerPoint { p, q }
    }

    pub fn is_primitive(&self) -> bool {
        let g = self
            .p
            .iter()
            .chain(self.q.entries())
            .fold(0i64, |acc, &x| acc.gcd(&x));
        g == 1
    }
}

impl fmt::Display for DangerPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P(p={}, q={})", IntVector(self.p.clone()), self.q)
    }
}

/// The affine hyperplane `{X : sum_ij coeff_ij X_ij = offset}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hyperplane {
    pub coefficients: Matrix,
    pub offset: Rational,
}

impl Hyperplane {
    pub fn new(coefficients: Matrix, offset: Rational) -> Option<Self> {
        if coefficients.entries().iter().all(Zero::is_zero) {
            return None;
        }
        Some(Hyperplane {
            coefficients,
            offset,
        })
    }

    pub fn evaluate(&self, x: &Matrix) -> Rational {
        self.coefficients.frobenius_dot(x)
    }
}

/// Closed-set test: does the cube meet the hyperplane?
pub fn cube_meets_hyperplane(cube: &Cube, h: &Hyperplane) -> bool {
    cube.linear_range(&h.coefficients).contains(&h.offset)
}

fn all_integral(gamma: &[Rational]) -> bool {
    gamma.iter().all(|g| g.is_integer())
}

/// Integer vectors `p` for which some row value `X_i q + gamma_i + p_i`, with
/// `X` in the cube, lies in `[-1/2, 1/2]`.
///
/// When every `gamma_i` is an integer only points with
/// `gcd(p + gamma, q) = 1` are returned; non-primitive points are positive
/// multiples of primitive ones at a smaller height. For non-integral `gamma`
/// that reduction is unavailable and all points are kept.
pub fn candidate_points(cube: &Cube, q: &IntVector, gamma: &[Rational]) -> Vec<DangerPoint> {
    let half = ratio(1, 2);
    let mut ranges: Vec<(i64, i64)> = Vec::with_capacity(gamma.len());
    for (i, g) in gamma.iter().enumerate() {
        let v = cube.row_range(i, q, g);
        let lo = (-&half - &v.hi).ceil().to_integer();
        let hi = (&half - &v.lo).floor().to_integer();
        if lo > hi {
            return Vec::new();
        }
        let lo = i64::try_from(lo).expect("p range fits i64");
        let hi = i64::try_from(hi).expect("p range fits i64");
        ranges.push((lo, hi));
    }
    let primitive_only = all_integral(gamma);
    let shift: Vec<i64> = if primitive_only {
        gamma
            .iter()
            .map(|g| i64::try_from(g.to_integer()).expect("gamma fits i64"))
            .collect()
    } else {
        Vec::new()
    };
    let mut out = Vec::new();
    let mut p: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let point = DangerPoint::new(p.clone(), q.clone());
        let keep = if primitive_only {
            let shifted = DangerPoint::new(p.iter().zip(&shift).map(|(a, b)| a + b).collect(), q.clone());
            shifted.is_primitive()
        } else {
            true
        };
        if keep {
            out.push(point);
        }
        // odometer over the row ranges, last row fastest
        let mut idx = p.len();
        loop {
            if idx == 0 {
                return out;
            }
            idx -= 1;
            if p[idx] < ranges[idx].1 {
                p[idx] += 1;
                break;
            }
            p[idx] = ranges[idx].0;
        }
    }
}

/// Row-separable test of whether a box meets
/// `{v : prod_i |v_i| <= eps, |v_i| <= bound}` where `v_i` ranges over the
/// given exact row intervals.
pub fn rows_meet_hyperbolic(rows: &[Interval], bound: &Rational, eps: &Rational) -> bool {
    let mut product = Rational::one();
    let mut zero = false;
    for v in rows {
        let lo = std::cmp::max(v.lo.clone(), -bound.clone());
        let hi = std::cmp::min(v.hi.clone(), bound.clone());
        if lo > hi {
            return false;
        }
        if !zero {
            if !lo.is_positive() && !hi.is_negative() {
                zero = true;
            } else {
                product *= std::cmp::min(lo.abs(), hi.abs());
            }
        }
    }
    zero || &product <= eps
}

/// Conservative test of `cube ∩ Δ(P) ≠ ∅` given an upper bound `eps_upper`
/// on the danger radius of `q`. Never answers `false` for a cube that meets
/// the true danger set.
pub fn cube_meets_danger(cube: &Cube, point: &DangerPoint, gamma: &[Rational], eps_upper: &Rational) -> bool {
    let rows: Vec<Interval> = gamma
        .iter()
        .zip(&point.p)
        .enumerate()
        .map(|(i, (g, &p))| cube.row_range(i, &point.q, &(g + int(p))))
        .collect();
    rows_meet_hyperbolic(&rows, &ratio(1, 2), eps_upper)
}
