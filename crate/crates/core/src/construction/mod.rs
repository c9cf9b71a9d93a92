//! Cantor-type construction of matrices avoiding every danger set
//! `Δ(P)` with `prod_plus(q) < F(K)`, and the certificates it produces.

pub mod certificate;
pub mod config;
pub mod geometry;
pub mod params;
pub mod search;
pub mod verify;

use thiserror::Error;

use crate::rational::{format_rational, Rational};

pub use certificate::{Certificate, CertificateFile, SearchStrategy};
pub use config::{
    band_of, enumerate_band, max_height_below, Cond5Constants, ConfigFile, ConstructionConfig, ParameterMode,
};
pub use geometry::{candidate_points, cube_meets_danger, cube_meets_hyperplane, Cube, DangerPoint, Hyperplane};
pub use params::{check_parameters, frak_f, minimal_r_condition_ii, removal_budget, ParameterReport};
pub use search::{check_removal_budgets, run_construction, run_construction_with_stats, SearchStats};
pub use verify::{verify_certificate, RejectReason, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("2^m c must be below 1, got c = {}", format_rational(.0))]
    InvalidC(Rational),
    #[error("parameters are not admissible in certified mode:\n{0}")]
    ParametersRejected(String),
    #[error("every branch died before depth {depth} (deepest generation {deepest}, {nodes} nodes expanded)")]
    Exhausted { depth: usize, deepest: usize, nodes: u64 },
    #[error("generation {generation}: observed {observed} removals exceed the budget {}", format_rational(.budget))]
    BudgetExceeded {
        generation: usize,
        observed: u64,
        budget: Rational,
    },
    #[error("generation {generation} frontier has {size} cubes, above the limit {limit}")]
    FrontierTooLarge { generation: usize, size: usize, limit: usize },
    #[error("finite-range bound {} does not exceed c", format_rational(.0))]
    BoundNotCertified(Rational),
}
