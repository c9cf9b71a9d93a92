//! Certificates and their canonical JSON form.

use serde::{Deserialize, Serialize};

use super::config::{matrix_from_file, matrix_to_file, ConfigFile, Cond5File, HyperplaneFile, ParameterMode};
use super::ConstructionConfig;
use super::ConstructionError;
use crate::diophantine::Matrix;
use crate::rational::{Rational, RationalString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchStrategy {
    #[serde(rename = "full")]
    FullFrontier,
    #[serde(rename = "dfs")]
    DfsWitness,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub config: ConstructionConfig,
    pub depth: usize,
    pub search: SearchStrategy,
    /// Child index followed at each generation.
    pub chain: Vec<u64>,
    /// Per generation: removals below the followed cube (dfs) or the maximum
    /// over generation-`h_k` anchors (full).
    pub observed_removals: Vec<u64>,
    pub witness: Matrix,
    /// `None` when no `q` has `prod_plus(q)^3 < R^K`.
    pub finite_range_bound: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub m: usize,
    pub n: usize,
    pub edge: RationalString,
    pub cube_origin: Vec<Vec<RationalString>>,
    pub gamma: Vec<RationalString>,
    pub c: RationalString,
    #[serde(rename = "R")]
    pub r: u64,
    #[serde(rename = "K")]
    pub k: usize,
    pub mode: ParameterMode,
    pub search: SearchStrategy,
    pub hyperplanes: Vec<HyperplaneFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub const_mn: Option<RationalString>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond5: Option<Cond5File>,
    pub chain: Vec<u64>,
    pub observed_removals: Vec<u64>,
    pub witness: Vec<Vec<RationalString>>,
    pub finite_range_bound: Option<RationalString>,
}

impl Certificate {
    pub fn to_file(&self) -> CertificateFile {
        let cfg = ConfigFile::from_config(&self.config);
        CertificateFile {
            m: cfg.m,
            n: cfg.n,
            edge: cfg.edge,
            cube_origin: cfg.cube_origin,
            gamma: cfg.gamma,
            c: cfg.c,
            r: cfg.r,
            k: self.depth,
            mode: cfg.mode,
            search: self.search,
            hyperplanes: cfg.hyperplanes,
            const_mn: cfg.const_mn,
            cond5: cfg.cond5,
            chain: self.chain.clone(),
            observed_removals: self.observed_removals.clone(),
            witness: matrix_to_file(&self.witness),
            finite_range_bound: self.finite_range_bound.clone().map(Into::into),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("certificate serializes");
        s.push('\n');
        s
    }

    /// Parses a certificate; the embedded configuration must be valid.
    pub fn from_json(text: &str) -> Result<Self, ConstructionError> {
        let file: CertificateFile =
            serde_json::from_str(text).map_err(|e| ConstructionError::InvalidConfig(format!("certificate: {e}")))?;
        Certificate::from_file(file)
    }

    pub fn from_file(file: CertificateFile) -> Result<Self, ConstructionError> {
        let witness = matrix_from_file(&file.witness, "witness")?;
        let cfg = ConfigFile {
            m: file.m,
            n: file.n,
            edge: file.edge,
            cube_origin: file.cube_origin,
            gamma: file.gamma,
            c: file.c,
            r: file.r,
            mode: file.mode,
            hyperplanes: file.hyperplanes,
            const_mn: file.const_mn,
            cond5: file.cond5,
            node_budget: None,
        };
        Ok(Certificate {
            config: cfg.into_config()?,
            depth: file.k,
            search: file.search,
            chain: file.chain,
            observed_removals: file.observed_removals,
            witness,
            finite_range_bound: file.finite_range_bound.map(|r| r.0),
        })
    }
}
