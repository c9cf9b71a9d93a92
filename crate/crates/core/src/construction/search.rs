//! Generation-by-generation pruning, in full-frontier or depth-first form.

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;

use super::certificate::{Certificate, SearchStrategy};
use super::config::{enumerate_band, max_height_below, ConstructionConfig, ParameterMode};
use super::geometry::{candidate_points, cube_meets_danger, cube_meets_hyperplane, Cube, DangerPoint};
use super::params::{check_parameters, removal_budget};
use super::ConstructionError;
use crate::diophantine::{prod_plus, scan_min_form, IntVector};
use crate::rational::{int, Rational};

/// Largest frontier the full search will hold in memory.
pub const FRONTIER_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Cubes whose children were generated and tested.
    pub nodes_expanded: u64,
    /// `#J_k` for `k = 0..=K` (full search only).
    pub frontier_sizes: Vec<u64>,
}

/// Precision of the certified lower bound recorded in certificates.
pub(crate) fn bound_precision(c: &Rational) -> Rational {
    c / Rational::from_integer(BigInt::one() << 32)
}

/// Danger radii indexed by height, covering every band below `depth`.
pub(crate) struct RadiusTable(Vec<Rational>);

impl RadiusTable {
    pub(crate) fn new(config: &ConstructionConfig, depth: usize) -> Self {
        let top = max_height_below(config.r, depth);
        let radii = (0..=top)
            .into_par_iter()
            .map(|p| if p == 0 { Rational::from_integer(0.into()) } else { config.danger_radius_upper(u128::from(p)) })
            .collect();
        RadiusTable(radii)
    }

    pub(crate) fn get(&self, q: &IntVector) -> &Rational {
        &self.0[prod_plus(q) as usize]
    }
}

/// Danger points of the given bands whose (enlarged) sets meet `cube`.
pub(crate) fn dangers_meeting(
    config: &ConstructionConfig,
    radii: &RadiusTable,
    bands: &[Vec<IntVector>],
    cube: &Cube,
) -> Vec<DangerPoint> {
    let mut out = Vec::new();
    for band in bands {
        for q in band {
            let eps = radii.get(q);
            for p in candidate_points(cube, q, &config.gamma) {
                if cube_meets_danger(cube, &p, &config.gamma, eps) {
                    out.push(p);
                }
            }
        }
    }
    out
}

struct Pruner<'a> {
    config: &'a ConstructionConfig,
    bands: Vec<Vec<IntVector>>,
    radii: RadiusTable,
}

impl<'a> Pruner<'a> {
    fn new(config: &'a ConstructionConfig, depth: usize) -> Self {
        let bands = (0..depth).map(|k| enumerate_band(config.n, config.r, k)).collect();
        Pruner {
            config,
            bands,
            radii: RadiusTable::new(config, depth),
        }
    }

    /// Removal flags for the children of a generation-`k` cube: newest band
    /// `k` and hyperplane `H_{k+1}`; older sets are inherited from ancestors.
    fn removed_children(&self, parent: &Cube, k: usize) -> Vec<bool> {
        let cfg = self.config;
        let dangers = dangers_meeting(cfg, &self.radii, &self.bands[k..=k], parent);
        let plane = cfg
            .hyperplane_for(k + 1)
            .filter(|h| cube_meets_hyperplane(parent, h));
        (0..cfg.split_count())
            .into_par_iter()
            .map(|idx| {
                let child = parent.child(idx, cfg.r);
                plane.is_some_and(|h| cube_meets_hyperplane(&child, h))
                    || dangers
                        .iter()
                        .any(|p| cube_meets_danger(&child, p, &cfg.gamma, self.radii.get(&p.q)))
            })
            .collect()
    }
}

/// Fails with `BudgetExceeded` at the first generation whose observed count
/// exceeds the theoretical removal budget.
pub fn check_removal_budgets(
    config: &ConstructionConfig,
    observed: &[u64],
    const_mn: &Rational,
) -> Result<(), ConstructionError> {
    for (k, &count) in observed.iter().enumerate() {
        let budget = removal_budget(config, k, const_mn)?;
        if int(count as i64) > budget {
            return Err(ConstructionError::BudgetExceeded {
                generation: k,
                observed: count,
                budget,
            });
        }
    }
    Ok(())
}

fn certified_preflight(config: &ConstructionConfig, depth: usize) -> Result<Rational, ConstructionError> {
    let report = check_parameters(config, depth.max(1));
    if !report.all_pass() {
        return Err(ConstructionError::ParametersRejected(report.to_string()));
    }
    Ok(config.const_mn.clone().expect("all_pass implies const_mn is present"))
}

pub fn run_construction(
    config: &ConstructionConfig,
    depth: usize,
    strategy: SearchStrategy,
) -> Result<Certificate, ConstructionError> {
    run_construction_with_stats(config, depth, strategy).map(|(c, _)| c)
}

pub fn run_construction_with_stats(
    config: &ConstructionConfig,
    depth: usize,
    strategy: SearchStrategy,
) -> Result<(Certificate, SearchStats), ConstructionError> {
    config.validate()?;
    let const_mn = match config.mode {
        ParameterMode::CertifiedParameters => Some(certified_preflight(config, depth)?),
        ParameterMode::Empirical => None,
    };
    let pruner = Pruner::new(config, depth);
    let (chain, observed, stats) = match strategy {
        SearchStrategy::DfsWitness => dfs(&pruner, depth)?,
        SearchStrategy::FullFrontier => full(&pruner, depth)?,
    };
    if let Some(k) = &const_mn {
        check_removal_budgets(config, &observed, k)?;
    }
    let mut cube = config.cube.clone();
    for &idx in &chain {
        cube = cube.child(idx, config.r);
    }
    let witness = cube.center();
    let finite_range_bound = finite_range_bound(config, depth, &witness)?;
    let mut recorded = config.clone();
    recorded.node_budget = None;
    let cert = Certificate {
        config: recorded,
        depth,
        search: strategy,
        chain,
        observed_removals: observed,
        witness,
        finite_range_bound,
    };
    Ok((cert, stats))
}

/// Certified minimum of the form over `0 < prod_plus(q)^3 < R^K`, or `None`
/// when that range is empty.
pub(crate) fn finite_range_bound(
    config: &ConstructionConfig,
    depth: usize,
    witness: &crate::diophantine::Matrix,
) -> Result<Option<Rational>, ConstructionError> {
    let top = max_height_below(config.r, depth);
    if top == 0 {
        return Ok(None);
    }
    let (lower, _) = scan_min_form(witness, &config.gamma, top, &bound_precision(&config.c))
        .map_err(|e| ConstructionError::InvalidConfig(e.to_string()))?;
    if lower <= config.c {
        return Err(ConstructionError::BoundNotCertified(lower));
    }
    Ok(Some(lower))
}

struct Frame {
    cube: Cube,
    survivors: Vec<u64>,
    removed: u64,
    next: usize,
}

type Outcome = (Vec<u64>, Vec<u64>, SearchStats);

fn dfs(pruner: &Pruner<'_>, depth: usize) -> Result<Outcome, ConstructionError> {
    let cfg = pruner.config;
    let mut stats = SearchStats::default();
    let mut stack: Vec<Frame> = Vec::new();
    let mut path: Vec<u64> = Vec::new();
    let mut deepest = 0;
    let mut pending = Some(cfg.cube.clone());
    loop {
        if let Some(cube) = pending.take() {
            let generation = stack.len();
            deepest = deepest.max(generation);
            if generation == depth {
                let removed = stack.iter().map(|f| f.removed).collect();
                return Ok((path, removed, stats));
            }
            if cfg.node_budget.is_some_and(|b| stats.nodes_expanded >= b) {
                break;
            }
            stats.nodes_expanded += 1;
            let flags = pruner.removed_children(&cube, generation);
            let removed = flags.iter().filter(|&&f| f).count() as u64;
            let survivors = (0..flags.len() as u64).filter(|&i| !flags[i as usize]).collect();
            stack.push(Frame {
                cube,
                survivors,
                removed,
                next: 0,
            });
        }
        let Some(top) = stack.last_mut() else { break };
        if top.next < top.survivors.len() {
            let idx = top.survivors[top.next];
            top.next += 1;
            path.push(idx);
            pending = Some(top.cube.child(idx, cfg.r));
        } else {
            stack.pop();
            if stack.is_empty() {
                break;
            }
            // frame j is reached through path[j - 1]
            path.truncate(stack.len() - 1);
        }
    }
    Err(ConstructionError::Exhausted {
        depth,
        deepest,
        nodes: stats.nodes_expanded,
    })
}

fn full(pruner: &Pruner<'_>, depth: usize) -> Result<Outcome, ConstructionError> {
    let cfg = pruner.config;
    let mut stats = SearchStats::default();
    let mut frontier: Vec<(Vec<u64>, Cube)> = vec![(Vec::new(), cfg.cube.clone())];
    let mut observed = Vec::with_capacity(depth);
    stats.frontier_sizes.push(1);
    for k in 0..depth {
        let h = cfg.anchor(k);
        let expanded: Vec<Vec<bool>> = frontier
            .iter()
            .map(|(_, cube)| pruner.removed_children(cube, k))
            .collect();
        stats.nodes_expanded += frontier.len() as u64;
        // frontier is in lexicographic path order, so equal anchors are adjacent
        let mut max_removed = 0u64;
        let mut run = 0u64;
        let mut prev: Option<&[u64]> = None;
        for ((path, _), flags) in frontier.iter().zip(&expanded) {
            let anchor = &path[..h];
            if prev != Some(anchor) {
                run = 0;
                prev = Some(anchor);
            }
            run += flags.iter().filter(|&&f| f).count() as u64;
            max_removed = max_removed.max(run);
        }
        observed.push(max_removed);
        let mut next = Vec::new();
        for ((path, cube), flags) in frontier.iter().zip(&expanded) {
            for (idx, &gone) in flags.iter().enumerate() {
                if !gone {
                    let mut p = path.clone();
                    p.push(idx as u64);
                    next.push((p, cube.child(idx as u64, cfg.r)));
                }
            }
        }
        if next.is_empty() {
            return Err(ConstructionError::Exhausted {
                depth,
                deepest: k,
                nodes: stats.nodes_expanded,
            });
        }
        if next.len() > FRONTIER_LIMIT {
            return Err(ConstructionError::FrontierTooLarge {
                generation: k + 1,
                size: next.len(),
                limit: FRONTIER_LIMIT,
            });
        }
        stats.frontier_sizes.push(next.len() as u64);
        frontier = next;
    }
    let chain = frontier.swap_remove(0).0;
    Ok((chain, observed, stats))
}
