//! Admissibility of `(c, R, ℓ)` and the theoretical removal budget.
//!
//! Every check rounds on the safe side: a condition is reported as passing
//! only when the certified enclosure proves it.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed};

use super::config::ConstructionConfig;
use super::ConstructionError;
use crate::diophantine::transcendental::{cmp_e_power, exp_bounds, exp_interval, ln_bounds, LogBounds};
use crate::rational::{int, to_f64, Interval, Rational};

const BITS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionResult {
    pub name: &'static str,
    pub status: ConditionStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParameterReport {
    pub results: Vec<ConditionResult>,
}

impl ParameterReport {
    pub fn get(&self, name: &str) -> Option<&ConditionResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn passes(&self, name: &str) -> bool {
        matches!(self.get(name), Some(r) if r.status == ConditionStatus::Pass)
    }

    /// True when no evaluated condition failed and none was skipped.
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.status == ConditionStatus::Pass)
    }

    fn push(&mut self, name: &'static str, ok: bool, detail: String) {
        let status = if ok { ConditionStatus::Pass } else { ConditionStatus::Fail };
        self.results.push(ConditionResult { name, status, detail });
    }

    fn skip(&mut self, name: &'static str, detail: &str) {
        self.results.push(ConditionResult {
            name,
            status: ConditionStatus::Skipped,
            detail: detail.to_string(),
        });
    }
}

impl fmt::Display for ParameterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            let s = match r.status {
                ConditionStatus::Pass => "pass",
                ConditionStatus::Fail => "FAIL",
                ConditionStatus::Skipped => "skip",
            };
            writeln!(f, "{:<10} {s}  {}", r.name, r.detail)?;
        }
        Ok(())
    }
}

/// Condition i: `2^m c < e^{-1}`, i.e. `1/(2^m c) > e`.
pub fn condition_i(m: usize, c: &Rational) -> bool {
    let scaled = c * int(1i64 << m);
    scaled.is_positive() && cmp_e_power(&scaled.recip(), 1) == Ordering::Greater
}

/// Condition ii: `R >= e^3`.
pub fn condition_ii(r: u64) -> bool {
    cmp_e_power(&int(r as i64), 3) == Ordering::Greater
}

/// Smallest integer `R` satisfying condition ii.
pub fn minimal_r_condition_ii() -> u64 {
    (1..).find(|&r| condition_ii(r)).expect("e^3 is finite")
}

fn ln_r(r: u64) -> Interval {
    ln_bounds(&int(r as i64), BITS).expect("R is positive")
}

/// Upper bound of `ℓ R^{-(k+1)/3} log*(R^{(k+1)/3})^λ`.
fn cond3_term_upper(edge: &Rational, r_log: &Interval, lambda: u32, k: usize) -> Rational {
    let a = Rational::new((k as i64 + 1).into(), 3.into());
    let decay = exp_bounds(&-(&a * &r_log.lo), BITS).hi;
    let log_star = std::cmp::max(int(1), &a * &r_log.hi);
    let mut pow = Rational::one();
    for _ in 0..lambda {
        pow *= &log_star;
    }
    edge * decay * pow
}

/// Condition iii for `k <= horizon`, plus the monotone tail: the map
/// `x ↦ log*(x)^λ / x` is decreasing once `x >= e^λ`, so the horizon covers
/// every larger `k` as soon as `R^{(horizon+1)/3} >= e^λ`.
pub fn condition_iii(config: &ConstructionConfig, horizon: usize) -> (bool, bool, Rational) {
    let lambda = config.lambda();
    let r_log = ln_r(config.r);
    let mut sup = Rational::from_integer(0.into());
    let mut ok = true;
    for k in 0..=horizon {
        let t = cond3_term_upper(config.edge(), &r_log, lambda, k);
        if t > config.c {
            ok = false;
        }
        sup = std::cmp::max(sup, t);
    }
    let a = Rational::new((horizon as i64 + 1).into(), 3.into());
    let tail = &a * &r_log.lo >= int(lambda as i64);
    (ok, tail, sup)
}

/// Lower-bound check of `c <= const ℓ^{m/(1-ε)} log*(R^{1/3})^{-n/(1-ε)}`.
pub fn condition_cond5(config: &ConstructionConfig, constant: &Rational, epsilon: &Rational) -> (bool, Rational) {
    let one_minus = int(1) - epsilon;
    let a = Rational::from_integer((config.m as i64).into()) / &one_minus;
    let b = Rational::from_integer((config.n as i64).into()) / &one_minus;
    let ln_edge = ln_bounds(config.edge(), BITS).expect("edge is positive");
    let edge_pow_lo = if a.is_positive() {
        // exp(a ln ℓ) is increasing in ln ℓ
        exp_bounds(&(&a * &ln_edge.lo), BITS).lo
    } else {
        exp_bounds(&(&a * &ln_edge.hi), BITS).lo
    };
    let r_log = ln_r(config.r);
    let ls_hi = std::cmp::max(int(1), &r_log.hi / int(3));
    let ln_ls_hi = ln_bounds(&ls_hi, BITS).expect("log* >= 1").hi;
    let ls_pow_lo = exp_bounds(&-(&b * ln_ls_hi), BITS).lo;
    let rhs_lo = constant * edge_pow_lo * ls_pow_lo;
    (config.c <= rhs_lo, rhs_lo)
}

/// Two-sided bounds on the factor
/// `c log(1/(2^m c))^{m-1} / log*(F(k)) · L^{n-1} · (L + ℓ^{-m}(2F(k)^{-m/n} - F(k+1)^{-m/n}) anchor)`
/// with `F(k) = exp(k L)` for a growth log `L` given as an enclosure.
pub fn frak_f_general(
    m: usize,
    n: usize,
    c: &Rational,
    edge: &Rational,
    growth_log: &Interval,
    k: usize,
    anchor_factor: &Rational,
) -> Result<LogBounds, ConstructionError> {
    let scaled = c * int(1i64 << m);
    if !c.is_positive() || scaled >= int(1) {
        return Err(ConstructionError::InvalidC(c.clone()));
    }
    let point = |x: Rational| Interval::point(x);
    let log_factor = if m == 1 {
        point(int(1))
    } else {
        ln_bounds(&scaled.recip(), BITS)
            .expect("argument exceeds one")
            .powi((m - 1) as u32)
    };
    let kk = Rational::from_integer((k as i64).into());
    let kl = growth_log.scale(&kk);
    let log_star = kl.max_with(&int(1));
    let ratio = Rational::new((m as i64).into(), (n as i64).into());
    let f_k = exp_interval(&kl.scale(&-ratio.clone()), BITS);
    let k1 = Rational::from_integer((k as i64 + 1).into());
    let f_k1 = exp_interval(&growth_log.scale(&k1).scale(&-ratio), BITS);
    let mut edge_pow = Rational::one();
    for _ in 0..m {
        edge_pow /= edge;
    }
    let tail = f_k
        .scale(&int(2))
        .sub(&f_k1)
        .scale(&(edge_pow * anchor_factor));
    let inner = growth_log.add(&tail);
    let value = log_factor
        .scale(c)
        .mul(&log_star.recip())
        .mul(&growth_log.powi((n - 1) as u32))
        .mul(&inner);
    let width = value.width();
    Ok(LogBounds::from_interval(value, width))
}

/// [`frak_f_general`] with `F(k) = R^{k/3}` and `∏_{h<h_k} R^m` as anchor.
pub fn frak_f(config: &ConstructionConfig, k: usize) -> Result<LogBounds, ConstructionError> {
    let growth = ln_r(config.r).scale(&Rational::new(1.into(), 3.into()));
    let h = config.anchor(k);
    let anchor = Rational::from_integer(num_bigint::BigInt::from(config.r).pow((config.m * h) as u32));
    frak_f_general(config.m, config.n, &config.c, config.edge(), &growth, k, &anchor)
}

/// Upper bound of `const (f̄ R^{mn(k-h_k+1)} + R^{(mn-1)(k-h_k+1)})`.
pub fn removal_budget(config: &ConstructionConfig, k: usize, const_mn: &Rational) -> Result<Rational, ConstructionError> {
    if !const_mn.is_positive() {
        return Err(ConstructionError::InvalidConfig("const_mn must be positive".into()));
    }
    let f = frak_f(config, k)?;
    let span = (k - config.anchor(k) + 1) as u32;
    let mn = (config.m * config.n) as u32;
    let r = num_bigint::BigInt::from(config.r);
    let full = Rational::from_integer(r.pow(mn * span));
    let thin = Rational::from_integer(r.pow((mn - 1) * span));
    Ok(const_mn * (f.upper * full + thin))
}

/// Runs every admissibility check up to `horizon`.
pub fn check_parameters(config: &ConstructionConfig, horizon: usize) -> ParameterReport {
    let mut report = ParameterReport::default();
    let dims_ok = config.m >= 1 && config.n >= 1 && config.m + config.n >= 3;
    report.push("dimension", dims_ok, format!("m={}, n={}", config.m, config.n));

    let i_ok = condition_i(config.m, &config.c);
    report.push(
        "i",
        i_ok,
        format!("2^m c = {} vs e^-1", crate::rational::format_rational(&(&config.c * int(1i64 << config.m)))),
    );
    report.push("ii", condition_ii(config.r), format!("R = {} vs e^3", config.r));

    let (iii_ok, tail, sup) = condition_iii(config, horizon);
    report.push(
        "iii",
        iii_ok,
        format!("sup over k <= {horizon} of the cond3 term <= {:.6}", to_f64(&sup)),
    );
    report.push(
        "tail",
        tail,
        format!("R^((K+1)/3) >= e^{} for K = {horizon}", config.lambda()),
    );

    match &config.cond5 {
        Some(c5) => {
            let (ok, rhs) = condition_cond5(config, &c5.constant, &c5.epsilon);
            report.push("cond5", ok, format!("right-hand side >= {:.6e}", to_f64(&rhs)));
        }
        None => report.skip("cond5", "no constants supplied"),
    }

    match &config.const_mn {
        Some(k_const) if i_ok => {
            let mut ok = true;
            let mut first_bad = None;
            for k in 0..=horizon {
                let h = config.anchor(k);
                let budget = match removal_budget(config, k, k_const) {
                    Ok(b) => b,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                };
                let span = (k - h + 1) as u32;
                let cells = num_bigint::BigInt::from(config.r).pow((config.m * config.n) as u32 * span);
                let g = crate::cantor::g_factor(k, h);
                let cap = g / int(std::cmp::max(2, k) as i64) * Rational::from_integer(cells);
                if budget > cap {
                    ok = false;
                    first_bad.get_or_insert(k);
                }
            }
            let detail = match first_bad {
                Some(k) => format!("removal budget exceeds the survival cap at k = {k}"),
                None => format!("budgets within the survival cap for k <= {horizon}"),
            };
            report.push("nonempty", ok, detail);
        }
        Some(_) => report.skip("nonempty", "condition i fails, budget undefined"),
        None => report.skip("nonempty", "no const_mn supplied"),
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn cfg(c: Rational, r: u64) -> ConstructionConfig {
        ConstructionConfig::empirical(1, 2, ratio(1, 4), ratio(1, 2), c, r)
    }

    #[test]
    fn minimal_r_is_21() {
        assert_eq!(minimal_r_condition_ii(), 21);
        assert!(!condition_ii(20));
    }

    #[test]
    fn large_r_passes_i_and_iii() {
        let config = cfg(ratio(11, 100), 1_000_000);
        let report = check_parameters(&config, 30);
        assert!(report.passes("i"));
        assert!(report.passes("iii"), "{report}");
        assert!(report.passes("tail"));
        let (_, _, sup) = condition_iii(&config, 30);
        assert!(sup > ratio(105, 1000) && sup < ratio(107, 1000), "{}", to_f64(&sup));
    }

    #[test]
    fn condition_i_rejects_half() {
        assert!(!condition_i(1, &ratio(1, 2)));
        assert!(condition_i(1, &ratio(18, 100)));
        assert!(!condition_i(1, &ratio(19, 100)));
    }

    #[test]
    fn frak_f_example() {
        let e_growth = Interval::point(int(1));
        let f = frak_f_general(1, 2, &ratio(1, 10), &ratio(1, 2), &e_growth, 0, &int(1)).unwrap();
        // (1/10)(1 + 2(2 - e^{-1/2})) = 0.37869...
        assert!(f.lower > ratio(37869, 100_000) && f.upper < ratio(37870, 100_000), "{}", to_f64(&f.lower));
        assert!(matches!(
            frak_f_general(1, 2, &ratio(1, 2), &ratio(1, 2), &e_growth, 0, &int(1)),
            Err(ConstructionError::InvalidC(_))
        ));
    }

    #[test]
    fn removal_budget_composition() {
        let mut config = cfg(ratio(1, 10), 27);
        config.cube.edge = ratio(1, 2);
        let f = frak_f(&config, 0).unwrap();
        let b = removal_budget(&config, 0, &int(1)).unwrap();
        assert_eq!(b, f.upper * int(729) + int(27));
        let b2 = removal_budget(&config, 0, &int(2)).unwrap();
        assert!(b2 > b);
        assert!(removal_budget(&config, 0, &int(0)).is_err());
    }
}
