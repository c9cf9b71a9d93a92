//! Generalised Cantor schemes: the survival recurrence
//! `t_k = R_k^l - r_k / prod_{i=h_k}^{k-1} t_i`, the non-emptiness budget
//! test, and an explicit construction used to cross-check both.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CantorError {
    #[error("prefix product of t over [{from}, {to}) vanishes at generation {k}")]
    DegenerateProduct { k: usize, from: usize, to: usize },
    #[error("scheme sequences are shorter than the requested depth {0}")]
    SequenceTooShort(usize),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("removal budget test fails at generation {k}; lower bound check does not apply")]
    PreconditionFailed { k: usize },
}

/// A `(C, R, h, r)` scheme in ambient dimension `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CantorScheme {
    pub l: u32,
    pub edge0: Rational,
    pub splits: Vec<u64>,
    pub removals: Vec<Rational>,
    pub anchors: Vec<usize>,
}

impl CantorScheme {
    pub fn new(
        l: u32,
        edge0: Rational,
        splits: Vec<u64>,
        removals: Vec<Rational>,
        anchors: Vec<usize>,
    ) -> Result<Self, CantorError> {
        if l == 0 {
            return Err(CantorError::InvalidScheme("dimension l must be positive".into()));
        }
        if !edge0.is_positive() {
            return Err(CantorError::InvalidScheme("edge of C must be positive".into()));
        }
        if let Some(k) = splits.iter().position(|&r| r == 0) {
            return Err(CantorError::InvalidScheme(format!("R_{k} must be at least 1")));
        }
        if let Some(k) = removals.iter().position(|r| r.is_negative()) {
            return Err(CantorError::InvalidScheme(format!("r_{k} must be non-negative")));
        }
        if let Some((k, h)) = anchors.iter().enumerate().find(|(k, &h)| h > *k) {
            return Err(CantorError::InvalidScheme(format!("h_{k} = {h} exceeds {k}")));
        }
        Ok(CantorScheme {
            l,
            edge0,
            splits,
            removals,
            anchors,
        })
    }

    /// Constant `R`, constant `r`, and `h_k = floor(k / divisor)` up to depth `len`.
    pub fn uniform(l: u32, edge0: Rational, split: u64, removal: Rational, divisor: usize, len: usize) -> Result<Self, CantorError> {
        let anchors = (0..len).map(|k| k / divisor.max(1)).collect();
        Self::new(l, edge0, vec![split; len], vec![removal; len], anchors)
    }

    fn depth_available(&self) -> usize {
        self.splits.len().min(self.removals.len()).min(self.anchors.len())
    }

    fn check_depth(&self, k_max: usize) -> Result<(), CantorError> {
        if k_max >= self.depth_available() {
            return Err(CantorError::SequenceTooShort(k_max));
        }
        Ok(())
    }

    /// `R_k^l` as an exact integer.
    pub fn cells(&self, k: usize) -> BigInt {
        BigInt::from(self.splits[k]).pow(self.l)
    }

    /// `prod_{h=h_k}^{k} R_h^l`.
    pub fn anchored_cells(&self, k: usize) -> BigInt {
        (self.anchors[k]..=k).map(|h| self.cells(h)).product()
    }
}

/// `t_0, ..., t_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TSequence(pub Vec<Rational>);

impl TSequence {
    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(|t| t.is_positive())
    }
}

pub fn t_sequence(scheme: &CantorScheme, k_max: usize) -> Result<TSequence, CantorError> {
    scheme.check_depth(k_max)?;
    let mut t: Vec<Rational> = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let from = scheme.anchors[k];
        let divisor: Rational = t[from..k].iter().fold(Rational::one(), |acc, x| acc * x);
        if divisor.is_zero() {
            return Err(CantorError::DegenerateProduct { k, from, to: k });
        }
        let cells = Rational::from_integer(scheme.cells(k));
        t.push(cells - &scheme.removals[k] / divisor);
    }
    Ok(TSequence(t))
}

/// `g_k = max(2, h_k) / (8 max(2, k - 1))`, with `max` taken literally for
/// `k = 0, 1`.
pub fn g_factor(k: usize, h_k: usize) -> Rational {
    let num = (h_k as i64).max(2);
    let den = 8 * (k as i64 - 1).max(2);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetRow {
    pub k: usize,
    pub g: Rational,
    pub budget: Rational,
    pub removal: Rational,
    pub pass: bool,
}

/// For each `k <= k_max`, the budget `g_k / max(2,k) * prod_{h=h_k}^{k} R_h^l`
/// and whether `r_k` fits inside it.
pub fn check_nonempty_bound(scheme: &CantorScheme, k_max: usize) -> Result<Vec<BudgetRow>, CantorError> {
    scheme.check_depth(k_max)?;
    Ok((0..=k_max)
        .map(|k| {
            let g = g_factor(k, scheme.anchors[k]);
            let budget = &g / int((k as i64).max(2)) * Rational::from_integer(scheme.anchored_cells(k));
            let removal = scheme.removals[k].clone();
            BudgetRow {
                k,
                pass: removal <= budget,
                g,
                budget,
                removal,
            }
        })
        .collect())
}

/// Checks `t_k >= R_k^l (1 - 1/max(2,k))` exactly for every `k <= k_max`.
///
/// Requires every row of [`check_nonempty_bound`] to pass.
pub fn t_lower_bound_check(scheme: &CantorScheme, k_max: usize) -> Result<Vec<bool>, CantorError> {
    if let Some(row) = check_nonempty_bound(scheme, k_max)?.iter().find(|r| !r.pass) {
        return Err(CantorError::PreconditionFailed { k: row.k });
    }
    let t = t_sequence(scheme, k_max)?;
    Ok(t.0
        .iter()
        .enumerate()
        .map(|(k, tk)| {
            let factor = int(1) - Rational::new(BigInt::one(), BigInt::from((k as i64).max(2)));
            *tk >= Rational::from_integer(scheme.cells(k)) * factor
        })
        .collect())
}

/// Prefix products `prod_{h<k} t_h` for `k = 0..=len`, i.e. lower bounds on
/// `#J_k` when `#J_0 = 1`.
pub fn jcount_lower(t: &TSequence) -> Vec<Rational> {
    let mut out = Vec::with_capacity(t.0.len() + 1);
    let mut acc = Rational::one();
    out.push(acc.clone());
    for tk in &t.0 {
        acc *= tk;
        out.push(acc.clone());
    }
    out
}

/// How the explicit construction chooses which subcubes to remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adversary {
    /// Remove exactly `min(floor(r_k), available)` cubes per anchor, at random.
    Greedy,
    /// Remove a uniformly random number in `0..=floor(r_k)` per anchor.
    Random,
}

/// Outcome of an explicit construction: `#J_k` for `k = 0..=depth` and whether
/// `#J_{k+1} >= R_k^l #J_k - r_k #J_{h_k}` held at every step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitRun {
    pub counts: Vec<u64>,
    pub counting_inequality_holds: bool,
}

/// Builds the families `J_0, ..., J_depth` by actually splitting cubes and
/// removing at most `floor(r_k)` subcubes of each anchor cube `J in J_{h_k}`.
///
/// Cubes are identified by their path of child indices from `C`.
pub fn explicit_construction<R: Rng>(
    scheme: &CantorScheme,
    depth: usize,
    adversary: Adversary,
    rng: &mut R,
) -> Result<ExplicitRun, CantorError> {
    if depth > 0 {
        scheme.check_depth(depth - 1)?;
    }
    let mut generations: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new()]];
    let mut holds = true;
    for k in 0..depth {
        let cells = u32::try_from(scheme.cells(k)).map_err(|_| {
            CantorError::InvalidScheme(format!("R_{k}^l too large for explicit construction"))
        })?;
        let split: Vec<Vec<u32>> = generations[k]
            .iter()
            .flat_map(|path| {
                (0..cells).map(move |c| {
                    let mut p = path.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
        let anchor = scheme.anchors[k];
        let mut by_anchor: BTreeMap<&[u32], Vec<usize>> = BTreeMap::new();
        for (idx, path) in split.iter().enumerate() {
            by_anchor.entry(&path[..anchor]).or_default().push(idx);
        }
        let cap = scheme.removals[k].floor().to_integer();
        let cap = usize::try_from(cap).unwrap_or(usize::MAX);
        let mut removed = vec![false; split.len()];
        for members in by_anchor.values() {
            let take = match adversary {
                Adversary::Greedy => cap.min(members.len()),
                Adversary::Random => rng.gen_range(0..=cap.min(members.len())),
            };
            for &idx in members.choose_multiple(rng, take) {
                removed[idx] = true;
            }
        }
        let next: Vec<Vec<u32>> = split
            .into_iter()
            .zip(&removed)
            .filter(|(_, &r)| !r)
            .map(|(p, _)| p)
            .collect();
        let lhs = Rational::from_integer(BigInt::from(next.len()));
        let rhs = Rational::from_integer(scheme.cells(k) * BigInt::from(generations[k].len()))
            - &scheme.removals[k] * Rational::from_integer(BigInt::from(generations[anchor].len()));
        holds &= lhs >= rhs;
        generations.push(next);
    }
    Ok(ExplicitRun {
        counts: generations.iter().map(|g| g.len() as u64).collect(),
        counting_inequality_holds: holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scheme(l: u32, splits: &[u64], removals: &[Rational], anchors: &[usize]) -> CantorScheme {
        CantorScheme::new(l, ratio(1, 2), splits.to_vec(), removals.to_vec(), anchors.to_vec()).unwrap()
    }

    #[test]
    fn t_sequence_examples() {
        let s = scheme(1, &[2, 2], &[int(1), int(1)], &[0, 0]);
        assert_eq!(t_sequence(&s, 1).unwrap().0, vec![int(1), int(1)]);

        let s = scheme(2, &[3, 3, 3], &[int(2), int(2), int(2)], &[0, 1, 2]);
        assert_eq!(t_sequence(&s, 2).unwrap().0, vec![int(7), int(7), int(7)]);

        let s = scheme(2, &[4], &[int(3)], &[0]);
        assert_eq!(t_sequence(&s, 0).unwrap().0, vec![int(13)]);
    }

    #[test]
    fn degenerate_product_is_reported() {
        let s = scheme(1, &[2, 2], &[int(2), int(0)], &[0, 0]);
        assert_eq!(
            t_sequence(&s, 1),
            Err(CantorError::DegenerateProduct { k: 1, from: 0, to: 1 })
        );
        assert!(matches!(t_sequence(&s, 5), Err(CantorError::SequenceTooShort(5))));
    }

    #[test]
    fn invalid_schemes_are_rejected() {
        assert!(CantorScheme::new(1, int(1), vec![2], vec![int(0)], vec![1]).is_err());
        assert!(CantorScheme::new(1, int(1), vec![0], vec![int(0)], vec![0]).is_err());
        assert!(CantorScheme::new(0, int(1), vec![2], vec![int(0)], vec![0]).is_err());
    }

    #[test]
    fn g_and_budget_examples() {
        assert_eq!(g_factor(0, 0), ratio(1, 8));
        assert_eq!(g_factor(5, 5) / int(5), ratio(1, 32));

        let pass = scheme(2, &[16], &[int(16)], &[0]);
        let rows = check_nonempty_bound(&pass, 0).unwrap();
        assert_eq!(rows[0].budget, int(16));
        assert!(rows[0].pass);
        let fail = scheme(2, &[16], &[int(17)], &[0]);
        assert!(!check_nonempty_bound(&fail, 0).unwrap()[0].pass);
    }

    fn equality_scheme(l: u32, split: u64, divisor: usize, depth: usize) -> CantorScheme {
        let anchors: Vec<usize> = (0..=depth).map(|k| k / divisor).collect();
        let mut s = CantorScheme::new(l, ratio(1, 2), vec![split; depth + 1], vec![int(0); depth + 1], anchors).unwrap();
        let rows = check_nonempty_bound(&s, depth).unwrap();
        s.removals = rows.into_iter().map(|r| r.budget).collect();
        s
    }

    #[test]
    fn lower_bound_holds_in_equality_case() {
        let s = equality_scheme(2, 16, 3, 6);
        assert!(t_lower_bound_check(&s, 6).unwrap().iter().all(|&b| b));
    }

    #[test]
    fn lower_bound_requires_budget() {
        let mut s = equality_scheme(2, 16, 3, 2);
        s.removals[0] += int(1);
        assert_eq!(t_lower_bound_check(&s, 2), Err(CantorError::PreconditionFailed { k: 0 }));
    }

    #[test]
    fn jcount_examples() {
        assert_eq!(jcount_lower(&TSequence(vec![int(1), int(1)])), vec![int(1), int(1), int(1)]);
        assert_eq!(jcount_lower(&TSequence(vec![int(7), int(7)])), vec![int(1), int(7), int(49)]);
        let s = equality_scheme(2, 16, 3, 6);
        let t = t_sequence(&s, 6).unwrap();
        let prefix = jcount_lower(&t);
        let mut acc = int(1);
        for (k, tk) in t.0.iter().enumerate() {
            assert_eq!(prefix[k], acc);
            acc = acc * tk;
        }
        assert_eq!(prefix[7], acc);
    }

    #[test]
    fn explicit_construction_survives_when_t_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = scheme(1, &[3, 3, 3, 3], &[int(1), int(2), int(2), int(2)], &[0, 1, 1, 2]);
        let t = t_sequence(&s, 3).unwrap();
        assert!(t.all_positive());
        for _ in 0..20 {
            let run = explicit_construction(&s, 4, Adversary::Greedy, &mut rng).unwrap();
            assert!(run.counting_inequality_holds);
            assert!(*run.counts.last().unwrap() > 0);
        }
    }

    proptest! {
        #[test]
        fn budget_implies_lower_bound(
            l in 1u32..3,
            split in 2u64..12,
            divisor in 1usize..5,
            shave in proptest::collection::vec(0u32..4, 13),
        ) {
            let mut s = equality_scheme(l, split, divisor, 12);
            for (r, &d) in s.removals.iter_mut().zip(&shave) {
                *r = &*r * ratio(4 - d as i64, 4);
            }
            prop_assert!(t_lower_bound_check(&s, 12).unwrap().iter().all(|&b| b));
        }
    }
}
