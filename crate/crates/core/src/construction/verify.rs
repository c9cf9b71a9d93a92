//! Independent re-check of a certificate from scratch: every chain cube is
//! tested against all bands up to its generation, not just the newest one.

use std::fmt;

use rayon::prelude::*;

use super::certificate::{Certificate, SearchStrategy};
use super::config::{enumerate_band, max_height_below, ConstructionConfig, ParameterMode};
use super::geometry::{cube_meets_danger, cube_meets_hyperplane, Cube, DangerPoint};
use super::params::check_parameters;
use super::search::{check_removal_budgets, dangers_meeting, finite_range_bound, RadiusTable};
use crate::diophantine::IntVector;
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    InvalidConfig(String),
    LengthMismatch { field: &'static str, expected: usize, found: usize },
    ChainIndexOutOfRange { generation: usize, index: u64 },
    WitnessShape,
    WitnessNotCenter,
    WitnessInDanger(DangerPoint),
    WitnessOnHyperplane(usize),
    ChainCubeInDanger { generation: usize, point: DangerPoint },
    ChainCubeOnHyperplane { generation: usize, hyperplane: usize },
    RemovalMismatch { generation: usize, recorded: u64, recomputed: u64 },
    BoundMismatch { recorded: Option<Rational>, recomputed: Option<Rational> },
    BoundNotAboveC,
    ParametersRejected(String),
    BudgetExceeded(String),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: &Option<Rational>| x.as_ref().map_or("null".to_string(), format_rational);
        match self {
            RejectReason::InvalidConfig(s) => write!(f, "invalid configuration: {s}"),
            RejectReason::LengthMismatch { field, expected, found } => {
                write!(f, "{field} has length {found}, expected {expected}")
            }
            RejectReason::ChainIndexOutOfRange { generation, index } => {
                write!(f, "chain index {index} at generation {generation} is out of range")
            }
            RejectReason::WitnessShape => write!(f, "witness has the wrong shape"),
            RejectReason::WitnessNotCenter => write!(f, "witness is not the center of the final chain cube"),
            RejectReason::WitnessInDanger(p) => write!(f, "witness lies in the danger set of {p}"),
            RejectReason::WitnessOnHyperplane(h) => write!(f, "witness lies on hyperplane H_{h}"),
            RejectReason::ChainCubeInDanger { generation, point } => {
                write!(f, "chain cube of generation {generation} meets the danger set of {point}")
            }
            RejectReason::ChainCubeOnHyperplane { generation, hyperplane } => {
                write!(f, "chain cube of generation {generation} meets hyperplane H_{hyperplane}")
            }
            RejectReason::RemovalMismatch { generation, recorded, recomputed } => write!(
                f,
                "generation {generation}: recorded {recorded} removals, recomputed {recomputed}"
            ),
            RejectReason::BoundMismatch { recorded, recomputed } => write!(
                f,
                "finite-range bound recorded as {}, recomputed as {}",
                opt(recorded),
                opt(recomputed)
            ),
            RejectReason::BoundNotAboveC => write!(f, "finite-range bound does not exceed c"),
            RejectReason::ParametersRejected(s) => write!(f, "parameters not admissible: {s}"),
            RejectReason::BudgetExceeded(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

struct Checker<'a> {
    config: &'a ConstructionConfig,
    bands: Vec<Vec<IntVector>>,
    radii: RadiusTable,
}

impl Checker<'_> {
    /// First danger point among bands `< generation` whose set meets `cube`.
    fn first_danger(&self, cube: &Cube, generation: usize) -> Option<DangerPoint> {
        dangers_meeting(self.config, &self.radii, &self.bands[..generation], cube)
            .into_iter()
            .next()
    }

    /// First hyperplane `H_h`, `h <= generation`, meeting `cube` (1-based).
    fn first_plane(&self, cube: &Cube, generation: usize) -> Option<usize> {
        (1..=generation).find(|&h| {
            self.config
                .hyperplane_for(h)
                .is_some_and(|p| cube_meets_hyperplane(cube, p))
        })
    }

    /// Number of children of a generation-`g` cube that meet any danger set
    /// with band `<= g` or any hyperplane `H_h`, `h <= g + 1`.
    fn count_removed(&self, parent: &Cube, g: usize) -> u64 {
        let cfg = self.config;
        let dangers = dangers_meeting(cfg, &self.radii, &self.bands[..=g], parent);
        let planes: Vec<_> = (1..=g + 1).filter_map(|h| cfg.hyperplane_for(h)).collect();
        (0..cfg.split_count())
            .into_par_iter()
            .filter(|&idx| {
                let child = parent.child(idx, cfg.r);
                planes.iter().any(|h| cube_meets_hyperplane(&child, h))
                    || dangers
                        .iter()
                        .any(|p| cube_meets_danger(&child, p, &cfg.gamma, self.radii.get(&p.q)))
            })
            .count() as u64
    }

    /// Rebuilds every generation and returns, per generation, the maximum
    /// number of removals below any generation-`h_k` anchor.
    fn frontier_maxima(&self, depth: usize) -> Vec<u64> {
        let cfg = self.config;
        let mut frontier: Vec<(Vec<u64>, Cube)> = vec![(Vec::new(), cfg.cube.clone())];
        let mut maxima = Vec::with_capacity(depth);
        for k in 0..depth {
            let h = cfg.anchor(k);
            let mut per_anchor: std::collections::BTreeMap<Vec<u64>, u64> = Default::default();
            let mut next = Vec::new();
            for (path, cube) in &frontier {
                let removed = self.count_removed(cube, k);
                *per_anchor.entry(path[..h].to_vec()).or_default() += removed;
                for idx in 0..cfg.split_count() {
                    let child = cube.child(idx, cfg.r);
                    let dead = self.first_danger(&child, k + 1).is_some() || self.first_plane(&child, k + 1).is_some();
                    if !dead {
                        let mut p = path.clone();
                        p.push(idx);
                        next.push((p, child));
                    }
                }
            }
            maxima.push(per_anchor.values().copied().max().unwrap_or(0));
            frontier = next;
            if frontier.is_empty() {
                maxima.resize(depth, 0);
                break;
            }
        }
        maxima
    }
}

/// Re-derives every claim in the certificate. The first failing check is
/// reported.
pub fn verify_certificate(cert: &Certificate) -> Verdict {
    match check(cert) {
        Ok(()) => Verdict::Accept,
        Err(r) => Verdict::Reject(r),
    }
}

fn check(cert: &Certificate) -> Result<(), RejectReason> {
    let cfg = &cert.config;
    let depth = cert.depth;
    cfg.validate().map_err(|e| RejectReason::InvalidConfig(e.to_string()))?;
    for (field, len) in [("chain", cert.chain.len()), ("observed_removals", cert.observed_removals.len())] {
        if len != depth {
            return Err(RejectReason::LengthMismatch { field, expected: depth, found: len });
        }
    }
    if cert.witness.rows() != cfg.m || cert.witness.cols() != cfg.n {
        return Err(RejectReason::WitnessShape);
    }
    let split = cfg.split_count();
    let mut chain = vec![cfg.cube.clone()];
    for (g, &idx) in cert.chain.iter().enumerate() {
        if idx >= split {
            return Err(RejectReason::ChainIndexOutOfRange { generation: g, index: idx });
        }
        let next = chain[g].child(idx, cfg.r);
        chain.push(next);
    }
    let checker = Checker {
        config: cfg,
        bands: (0..depth).map(|k| enumerate_band(cfg.n, cfg.r, k)).collect(),
        radii: RadiusTable::new(cfg, depth),
    };

    let point = Cube::point(cert.witness.clone());
    if let Some(p) = checker.first_danger(&point, depth) {
        return Err(RejectReason::WitnessInDanger(p));
    }
    for h in 1..=depth {
        if let Some(plane) = cfg.hyperplane_for(h) {
            if plane.evaluate(&cert.witness) == plane.offset {
                return Err(RejectReason::WitnessOnHyperplane(h));
            }
        }
    }
    if cert.witness != chain[depth].center() {
        return Err(RejectReason::WitnessNotCenter);
    }

    for (g, cube) in chain.iter().enumerate().skip(1) {
        if let Some(p) = checker.first_danger(cube, g) {
            return Err(RejectReason::ChainCubeInDanger { generation: g, point: p });
        }
        if let Some(h) = checker.first_plane(cube, g) {
            return Err(RejectReason::ChainCubeOnHyperplane { generation: g, hyperplane: h });
        }
    }

    let recomputed: Vec<u64> = match cert.search {
        SearchStrategy::DfsWitness => (0..depth).map(|g| checker.count_removed(&chain[g], g)).collect(),
        SearchStrategy::FullFrontier => checker.frontier_maxima(depth),
    };
    for (g, (&rec, &re)) in cert.observed_removals.iter().zip(&recomputed).enumerate() {
        if rec != re {
            return Err(RejectReason::RemovalMismatch { generation: g, recorded: rec, recomputed: re });
        }
    }

    let recomputed_bound = match finite_range_bound(cfg, depth, &cert.witness) {
        Ok(b) => b,
        Err(_) => return Err(RejectReason::BoundNotAboveC),
    };
    if recomputed_bound != cert.finite_range_bound {
        return Err(RejectReason::BoundMismatch {
            recorded: cert.finite_range_bound.clone(),
            recomputed: recomputed_bound,
        });
    }
    if max_height_below(cfg.r, depth) > 0 && !cert.finite_range_bound.as_ref().is_some_and(|b| b > &cfg.c) {
        return Err(RejectReason::BoundNotAboveC);
    }

    if cfg.mode == ParameterMode::CertifiedParameters {
        let report = check_parameters(cfg, depth.max(1));
        if !report.all_pass() {
            return Err(RejectReason::ParametersRejected(report.to_string()));
        }
        let k = cfg.const_mn.as_ref().expect("all_pass implies const_mn");
        check_removal_budgets(cfg, &cert.observed_removals, k)
            .map_err(|e| RejectReason::BudgetExceeded(e.to_string()))?;
    }
    Ok(())
}
