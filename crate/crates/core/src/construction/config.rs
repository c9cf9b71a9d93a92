//! Construction parameters, band enumeration and danger radii.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::geometry::{Cube, Hyperplane};
use super::ConstructionError;
use crate::diophantine::{log_star_power, vectors_with_prod_plus_between, IntVector, Matrix};
use crate::rational::{from_strings, int, ratio, to_strings, Rational, RationalString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParameterMode {
    /// Every admissibility condition must pass and removal counts are held to
    /// the theoretical budget.
    CertifiedParameters,
    /// Small `R` for executable runs; only the finite-range property is
    /// certified.
    Empirical,
}

/// User-supplied constants for the `cond5` admissibility check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cond5Constants {
    pub constant: Rational,
    pub epsilon: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionConfig {
    pub m: usize,
    pub n: usize,
    pub cube: Cube,
    pub gamma: Vec<Rational>,
    pub c: Rational,
    pub r: u64,
    /// `hyperplanes[k]` is avoided from generation `k + 1` on.
    pub hyperplanes: Vec<Hyperplane>,
    pub mode: ParameterMode,
    pub const_mn: Option<Rational>,
    pub cond5: Option<Cond5Constants>,
    /// DFS node limit; `None` means unlimited.
    pub node_budget: Option<u64>,
}

/// Precision of the `log*` factors inside danger radii.
const RADIUS_LOG_BITS: u32 = 48;

impl ConstructionConfig {
    /// Homogeneous empirical configuration on the cube `[lo, lo + edge]^{m x n}`.
    pub fn empirical(m: usize, n: usize, lo: Rational, edge: Rational, c: Rational, r: u64) -> Self {
        ConstructionConfig {
            m,
            n,
            cube: Cube::new(Matrix::filled(m, n, lo), edge),
            gamma: vec![Rational::zero(); m],
            c,
            r,
            hyperplanes: Vec::new(),
            mode: ParameterMode::Empirical,
            const_mn: None,
            cond5: None,
            node_budget: None,
        }
    }

    pub fn edge(&self) -> &Rational {
        &self.cube.edge
    }

    /// `m + n - 1`, the power of `log*` in the form.
    pub fn lambda(&self) -> u32 {
        (self.m + self.n - 1) as u32
    }

    /// `h_k = floor(k / (3n))`.
    pub fn anchor(&self, k: usize) -> usize {
        k / (3 * self.n)
    }

    pub fn split_count(&self) -> u64 {
        self.r
            .checked_pow((self.m * self.n) as u32)
            .expect("R^{mn} fits in u64 (checked by validate)")
    }

    pub fn validate(&self) -> Result<(), ConstructionError> {
        let bad = |msg: String| Err(ConstructionError::InvalidConfig(msg));
        if self.m == 0 || self.n == 0 {
            return bad("m and n must be positive".into());
        }
        if self.m + self.n < 3 {
            return bad("m+n ≥ 3 required".into());
        }
        if self.r < 2 {
            return bad(format!("R must be at least 2, got {}", self.r));
        }
        if self.r.checked_pow((self.m * self.n) as u32).is_none() {
            return bad("R^{mn} overflows u64".into());
        }
        if !self.cube.edge.is_positive() {
            return bad("cube edge must be positive".into());
        }
        if self.cube.rows() != self.m || self.cube.cols() != self.n {
            return bad(format!(
                "cube origin is {}x{}, expected {}x{}",
                self.cube.rows(),
                self.cube.cols(),
                self.m,
                self.n
            ));
        }
        if self.gamma.len() != self.m {
            return bad(format!("gamma has length {}, expected {}", self.gamma.len(), self.m));
        }
        if !self.c.is_positive() {
            return bad("c must be positive".into());
        }
        for (idx, h) in self.hyperplanes.iter().enumerate() {
            if h.coefficients.rows() != self.m || h.coefficients.cols() != self.n {
                return bad(format!("hyperplane {} has the wrong shape", idx + 1));
            }
            if h.coefficients.entries().iter().all(Zero::is_zero) {
                return bad(format!("hyperplane {} has zero coefficients", idx + 1));
            }
        }
        if let Some(k) = &self.const_mn {
            if !k.is_positive() {
                return bad("const_mn must be positive".into());
            }
        }
        if let Some(c5) = &self.cond5 {
            if !c5.constant.is_positive() || !c5.epsilon.is_positive() || c5.epsilon >= int(1) {
                return bad("cond5 needs constant > 0 and 0 < epsilon < 1".into());
            }
        }
        Ok(())
    }

    /// Hyperplane avoided from generation `generation` on (1-based).
    pub fn hyperplane_for(&self, generation: usize) -> Option<&Hyperplane> {
        generation.checked_sub(1).and_then(|i| self.hyperplanes.get(i))
    }

    /// Certified upper bound on `c / (P log*(P)^{m+n-1})`.
    pub fn danger_radius_upper(&self, height: u128) -> Rational {
        danger_radius_upper(&self.c, self.lambda(), height)
    }
}

pub fn danger_radius_upper(c: &Rational, lambda: u32, height: u128) -> Rational {
    let precision = Rational::new(One::one(), BigInt::one() << RADIUS_LOG_BITS as usize);
    let pow = log_star_power(height, lambda, &precision);
    c / (Rational::from_integer(BigInt::from(height)) * pow.lo)
}

/// Floor of the cube root of `v`.
fn icbrt(v: &BigUint) -> BigUint {
    v.cbrt()
}

fn r_pow(r: u64, k: usize) -> BigUint {
    BigUint::from(r).pow(k as u32)
}

/// Largest `P` with `P^3 < R^k`; zero when `k = 0`.
pub fn max_height_below(r: u64, k: usize) -> u64 {
    let bound = r_pow(r, k);
    if bound.is_one() {
        return 0;
    }
    icbrt(&(bound - 1u32)).to_u64().expect("height fits u64")
}

/// Band index `k` with `R^k <= P^3 < R^{k+1}`.
pub fn band_of(height: u128, r: u64) -> usize {
    let cube = BigUint::from(height).pow(3);
    let mut k = 0;
    let mut next = BigUint::from(r);
    while next <= cube {
        next *= r;
        k += 1;
    }
    k
}

/// All nonzero `q` with `R^k <= prod_plus(q)^3 < R^{k+1}`, lexicographic.
pub fn enumerate_band(n: usize, r: u64, k: usize) -> Vec<IntVector> {
    let lo_pow = r_pow(r, k);
    let mut lo = icbrt(&lo_pow);
    if lo.pow(3) < lo_pow {
        lo += 1u32;
    }
    let lo = lo.to_u64().expect("height fits u64").max(1);
    let hi = max_height_below(r, k + 1);
    vectors_with_prod_plus_between(n, lo, hi)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperplaneFile {
    pub coefficients: Vec<Vec<RationalString>>,
    pub offset: RationalString,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cond5File {
    pub constant: RationalString,
    pub epsilon: RationalString,
}

/// On-disk configuration. Every rational is a canonical `p/q` string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub m: usize,
    pub n: usize,
    pub edge: RationalString,
    pub cube_origin: Vec<Vec<RationalString>>,
    pub gamma: Vec<RationalString>,
    pub c: RationalString,
    #[serde(rename = "R")]
    pub r: u64,
    pub mode: ParameterMode,
    #[serde(default)]
    pub hyperplanes: Vec<HyperplaneFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub const_mn: Option<RationalString>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond5: Option<Cond5File>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_budget: Option<u64>,
}

pub(crate) fn matrix_from_file(rows: &[Vec<RationalString>], what: &str) -> Result<Matrix, ConstructionError> {
    Matrix::from_rows(rows.iter().map(|r| from_strings(r)).collect())
        .map_err(|e| ConstructionError::InvalidConfig(format!("{what}: {e}")))
}

pub(crate) fn matrix_to_file(x: &Matrix) -> Vec<Vec<RationalString>> {
    x.to_rows().iter().map(|r| to_strings(r)).collect()
}

impl ConfigFile {
    pub fn into_config(self) -> Result<ConstructionConfig, ConstructionError> {
        let origin = matrix_from_file(&self.cube_origin, "cube_origin")?;
        let mut hyperplanes = Vec::with_capacity(self.hyperplanes.len());
        for (idx, h) in self.hyperplanes.iter().enumerate() {
            let coeff = matrix_from_file(&h.coefficients, "hyperplane coefficients")?;
            let plane = Hyperplane::new(coeff, h.offset.0.clone()).ok_or_else(|| {
                ConstructionError::InvalidConfig(format!("hyperplane {} has zero coefficients", idx + 1))
            })?;
            hyperplanes.push(plane);
        }
        let config = ConstructionConfig {
            m: self.m,
            n: self.n,
            cube: Cube::new(origin, self.edge.0),
            gamma: from_strings(&self.gamma),
            c: self.c.0,
            r: self.r,
            hyperplanes,
            mode: self.mode,
            const_mn: self.const_mn.map(|x| x.0),
            cond5: self.cond5.map(|c| Cond5Constants {
                constant: c.constant.0,
                epsilon: c.epsilon.0,
            }),
            node_budget: self.node_budget,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_config(config: &ConstructionConfig) -> Self {
        ConfigFile {
            m: config.m,
            n: config.n,
            edge: config.cube.edge.clone().into(),
            cube_origin: matrix_to_file(&config.cube.origin),
            gamma: to_strings(&config.gamma),
            c: config.c.clone().into(),
            r: config.r,
            mode: config.mode,
            hyperplanes: config
                .hyperplanes
                .iter()
                .map(|h| HyperplaneFile {
                    coefficients: matrix_to_file(&h.coefficients),
                    offset: h.offset.clone().into(),
                })
                .collect(),
            const_mn: config.const_mn.clone().map(Into::into),
            cond5: config.cond5.as_ref().map(|c| Cond5File {
                constant: c.constant.clone().into(),
                epsilon: c.epsilon.clone().into(),
            }),
            node_budget: config.node_budget,
        }
    }
}

/// Default half-unit box used by examples: `[1/4, 3/4]^{m x n}`.
pub fn central_cube(m: usize, n: usize) -> Cube {
    Cube::new(Matrix::filled(m, n, ratio(1, 4)), ratio(1, 2))
}
