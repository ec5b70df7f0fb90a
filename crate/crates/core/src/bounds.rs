//! Closed-form I/O lower bounds.
//!
//! Below the main regime (`n < 2 sqrt(M)` for Strassen) every bound falls
//! back to `3n^2`: all `2n^2` inputs must be read and all `n^2` outputs
//! written. Whenever the ratio of powers is exact the value is computed in
//! integers and reported in [`BoundValue::exact`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("{name} must be at least 1")]
    Zero { name: &'static str },
    #[error("n must be a power of {base}, got {n}")]
    NotPowerOf { n: u64, base: u64 },
    #[error("parallel bounds need M*P >= 2n^2, got M*P = {mp} < {need}")]
    ParallelMemory { mp: u128, need: u128 },
    #[error("needs n >= 2 sqrt(M) with n / (2 sqrt(M)) a power of 2, got n={n}, M={m}")]
    Regime { n: u64, m: u64 },
    #[error("unknown formula `{0}`")]
    UnknownFormula(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundParams {
    pub n: u64,
    /// Cache (or local memory) words `M`.
    #[serde(rename = "M")]
    pub cache: u64,
    #[serde(rename = "P")]
    pub procs: u64,
    pub n0: u64,
    pub m0: u64,
    /// Number of disjoint sub-problems for the generic bound.
    pub q: u64,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams {
            n: 1,
            cache: 1,
            procs: 1,
            n0: 2,
            m0: 7,
            q: 0,
        }
    }
}

impl BoundParams {
    pub fn new(n: u64, cache: u64) -> Self {
        BoundParams {
            n,
            cache,
            ..Default::default()
        }
    }

    pub fn with_procs(self, procs: u64) -> Self {
        BoundParams { procs, ..self }
    }

    fn check(&self) -> Result<(), BoundError> {
        for (name, v) in [("n", self.n), ("M", self.cache), ("P", self.procs)] {
            if v == 0 {
                return Err(BoundError::Zero { name });
            }
        }
        Ok(())
    }

    fn check_parallel(&self) -> Result<(), BoundError> {
        self.check()?;
        let mp = self.cache as u128 * self.procs as u128;
        let need = 2 * (self.n as u128) * (self.n as u128);
        if mp < need {
            return Err(BoundError::ParallelMemory { mp, need });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Main,
    TrivialFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub formula_id: String,
    /// Words moved between cache and slow memory (per processor when parallel).
    pub value: f64,
    /// The same value as an integer when it is one and was computed exactly.
    pub exact: Option<u64>,
    pub regime: Regime,
}

impl BoundValue {
    fn exact(formula: Formula, v: u64, regime: Regime) -> Self {
        BoundValue {
            formula_id: formula.id().to_string(),
            value: v as f64,
            exact: Some(v),
            regime,
        }
    }

    fn real(formula: Formula, value: f64) -> Self {
        BoundValue {
            formula_id: formula.id().to_string(),
            value,
            exact: None,
            regime: Regime::Main,
        }
    }

    fn fallback(formula: Formula, n: u64) -> Self {
        Self::exact(formula, 3 * n * n, Regime::TrivialFallback)
    }

    fn divided(self, p: u64) -> Self {
        let exact = self.exact.filter(|v| v % p == 0).map(|v| v / p);
        BoundValue {
            value: self.value / p as f64,
            exact,
            ..self
        }
    }
}

/// The evaluable formulas, by CLI name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    StrassenSeq,
    StrassenPar,
    GenericQm,
    GenericQmPar,
    StrassenLike,
    StrassenLikePar,
}

impl Formula {
    pub const ALL: [Formula; 6] = [
        Formula::StrassenSeq,
        Formula::StrassenPar,
        Formula::GenericQm,
        Formula::GenericQmPar,
        Formula::StrassenLike,
        Formula::StrassenLikePar,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Formula::StrassenSeq => "strassen-seq",
            Formula::StrassenPar => "strassen-par",
            Formula::GenericQm => "generic-qm",
            Formula::GenericQmPar => "generic-qm-par",
            Formula::StrassenLike => "strassen-like",
            Formula::StrassenLikePar => "strassen-like-par",
        }
    }

    /// Human-readable expression, constants included.
    pub fn expression(self) -> &'static str {
        match self {
            Formula::StrassenSeq => "(1/7) (n/sqrt(M))^log2(7) M",
            Formula::StrassenPar => "(1/7) (n/sqrt(M))^log2(7) M / P",
            Formula::GenericQm => "q M",
            Formula::GenericQmPar => "q M / P",
            Formula::StrassenLike => "(1/m0^2) (n/(2 sqrt(M)))^log_n0(m0) M",
            Formula::StrassenLikePar => "(1/m0^2) (n/(2 sqrt(M)))^log_n0(m0) M / P",
        }
    }

    pub fn evaluate(self, p: &BoundParams) -> Result<BoundValue, BoundError> {
        match self {
            Formula::StrassenSeq => strassen_seq_bound(p),
            Formula::StrassenPar => strassen_par_bound(p),
            Formula::GenericQm => generic_qm_bound(p),
            Formula::GenericQmPar => generic_qm_par(p),
            Formula::StrassenLike => strassen_like_bound(p),
            Formula::StrassenLikePar => strassen_like_par(p),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Formula {
    type Err = BoundError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Formula::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| BoundError::UnknownFormula(s.to_string()))
    }
}

/// `k` with `base^k = x`.
fn exact_log(x: u128, base: u128) -> Option<u32> {
    if x == 0 || base < 2 {
        return None;
    }
    let (mut x, mut k) = (x, 0);
    while x % base == 0 {
        x /= base;
        k += 1;
    }
    (x == 1).then_some(k)
}

/// `k` with `n / sqrt(M) = 2^k`, or `n / (2 sqrt(M)) = base^k` in general:
/// `n^2 / (scale M)` must be an exact power of `base^2`.
fn exact_ratio_exp(n: u64, m: u64, scale: u64, base: u64) -> Option<u32> {
    let n2 = n as u128 * n as u128;
    let d = scale as u128 * m as u128;
    if !n2.is_multiple_of(d) {
        return None;
    }
    exact_log(n2 / d, base as u128 * base as u128)
}

fn checked_pow_mul(base: u64, exp: u32, m: u64) -> Option<u64> {
    base.checked_pow(exp)?.checked_mul(m)
}

/// `(1/7) (n/sqrt(M))^log2(7) M` for `n >= 2 sqrt(M)`, else `3n^2`.
pub fn strassen_seq_bound(p: &BoundParams) -> Result<BoundValue, BoundError> {
    p.check()?;
    let (n, m) = (p.n, p.cache);
    if !n.is_power_of_two() {
        return Err(BoundError::NotPowerOf { n, base: 2 });
    }
    let f = Formula::StrassenSeq;
    if (n as u128) * (n as u128) < 4 * m as u128 {
        return Ok(BoundValue::fallback(f, n));
    }
    // (n/sqrt(M))^log2(7) = 7^k when n/sqrt(M) = 2^k, and k >= 1 here.
    if let Some(v) = exact_ratio_exp(n, m, 1, 2).and_then(|k| checked_pow_mul(7, k - 1, m)) {
        return Ok(BoundValue::exact(f, v, Regime::Main));
    }
    let ratio2 = (n as f64) * (n as f64) / m as f64;
    Ok(BoundValue::real(f, ratio2.powf(7f64.log2() / 2.0) * m as f64 / 7.0))
}

/// [`strassen_seq_bound`] divided by `P`; needs `M P >= 2n^2`.
pub fn strassen_par_bound(p: &BoundParams) -> Result<BoundValue, BoundError> {
    p.check_parallel()?;
    let v = strassen_seq_bound(p)?.divided(p.procs);
    Ok(BoundValue {
        formula_id: Formula::StrassenPar.id().to_string(),
        ..v
    })
}

/// `q M`.
pub fn generic_qm_bound(p: &BoundParams) -> Result<BoundValue, BoundError> {
    p.check()?;
    let v = (p.q as u128 * p.cache as u128).try_into().ok();
    Ok(match v {
        Some(v) => BoundValue::exact(Formula::GenericQm, v, Regime::Main),
        None => BoundValue::real(Formula::GenericQm, p.q as f64 * p.cache as f64),
    })
}

/// `q M / P`; needs `M P >= 2n^2`.
pub fn generic_qm_par(p: &BoundParams) -> Result<BoundValue, BoundError> {
    p.check_parallel()?;
    let v = generic_qm_bound(p)?.divided(p.procs);
    Ok(BoundValue {
        formula_id: Formula::GenericQmPar.id().to_string(),
        ..v
    })
}

/// `(1/m0^2) (n/(2 sqrt(M)))^log_n0(m0) M`: the guaranteed `m0^(i-2)`
/// disjoint sub-problems of dimension `2 sqrt(M)`, each forcing `M` I/Os,
/// where `i = log_n0(n / (2 sqrt(M)))`. Falls back to `3n^2` when `i < 2`.
pub fn strassen_like_bound(p: &BoundParams) -> Result<BoundValue, BoundError> {
    p.check()?;
    let (n, m, n0, m0) = (p.n, p.cache, p.n0, p.m0);
    if n0 < 2 {
        return Err(BoundError::Zero { name: "n0 - 1" });
    }
    if m0 == 0 {
        return Err(BoundError::Zero { name: "m0" });
    }
    if exact_log(n as u128, n0 as u128).is_none() {
        return Err(BoundError::NotPowerOf { n, base: n0 });
    }
    let f = Formula::StrassenLike;
    if let Some(i) = exact_ratio_exp(n, m, 4, n0) {
        return Ok(if i < 2 {
            BoundValue::fallback(f, n)
        } else {
            match checked_pow_mul(m0, i - 2, m) {
                Some(v) => BoundValue::exact(f, v, Regime::Main),
                None => BoundValue::real(f, (m0 as f64).powi(i as i32 - 2) * m as f64),
            }
        });
    }
    let ratio2 = (n as f64) * (n as f64) / (4.0 * m as f64);
    let i = ratio2.ln() / (2.0 * (n0 as f64).ln());
    if i < 2.0 {
        return Ok(BoundValue::fallback(f, n));
    }
    Ok(BoundValue::real(f, (m0 as f64).powf(i - 2.0) * m as f64))
}

/// [`strassen_like_bound`] divided by `P`; needs `M P >= 2n^2`.
pub fn strassen_like_par(p: &BoundParams) -> Result<BoundValue, BoundError> {
    p.check_parallel()?;
    let v = strassen_like_bound(p)?.divided(p.procs);
    Ok(BoundValue {
        formula_id: Formula::StrassenLikePar.id().to_string(),
        ..v
    })
}

/// Total output count `4M (n/(2 sqrt(M)))^log2(7)` of the sub-CDAGs of
/// dimension `2 sqrt(M)` in `H^{n x n}`.
pub fn count_z(n: u64, m: u64) -> Result<u64, BoundError> {
    if n == 0 || m == 0 {
        return Err(BoundError::Zero { name: "n and M" });
    }
    exact_ratio_exp(n, m, 4, 2)
        .and_then(|j| checked_pow_mul(7, j, 4 * m))
        .ok_or(BoundError::Regime { n, m })
}

/// Recursion depth of the `2 sqrt(M)` sub-CDAGs in `H^{n x n}`.
pub fn z_level(n: u64, m: u64) -> Result<u32, BoundError> {
    exact_ratio_exp(n, m, 4, 2).ok_or(BoundError::Regime { n, m })
}

/// Every dominator of `o` outputs of a disjoint union of Strassen CDAGs has
/// at least `ceil(o/2)` vertices.
pub fn corollary_half(o: usize) -> usize {
    o.div_ceil(2)
}

/// Minimum dominator size of any `4M` outputs of the `2 sqrt(M)` sub-CDAGs.
pub fn dominator_2m(m: u64) -> u64 {
    2 * m
}

/// `4 sqrt(M (|Z| - 2|Gamma|))`, or `None` when the radicand is not positive.
pub fn disjoint_paths_bound(m: u64, z: usize, gamma: usize) -> Option<f64> {
    let r = z as i64 - 2 * gamma as i64;
    (r > 0).then(|| 4.0 * ((m as i64 * r) as f64).sqrt())
}

/// `2n sqrt(|O'| - 2|Gamma|)`, or `None` when the radicand is not positive.
pub fn internal_flow_bound(n: usize, o: usize, gamma: usize) -> Option<f64> {
    let r = o as i64 - 2 * gamma as i64;
    (r > 0).then(|| 2.0 * n as f64 * (r as f64).sqrt())
}
