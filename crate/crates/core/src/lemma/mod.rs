//! Desk-scale checks of the combinatorial facts behind the lower bounds:
//! encoder connectivity, dominator sizes, disjoint paths and sub-CDAG
//! families. Every check returns a [`LemmaVerdict`]; sampled checks are
//! seeded and the seed is recorded.

mod dominators;
mod families;
mod flow;
mod table1;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::BoundError;
use crate::builders::BuildError;
use crate::domflow::DomflowError;

pub use dominators::{
    disjoint_path_count, verify_corollary_half, verify_disjoint_paths, verify_dominator_2m,
    z_family, DisjointPathInstance, ZFamily,
};
pub use families::{claimed_members, verify_family_disjointness};
pub use flow::verify_empirical_flow;
pub use table1::{
    encoder_max_disjoint, golden_table1, verify_table1, EncoderSubsetCode, Table1Row,
    Table1Verdict, TABLE1_CSV,
};

#[derive(Debug, Error)]
pub enum LemmaError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Domflow(#[from] DomflowError),
    #[error("golden table: {0}")]
    Golden(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("invalid code {0}: must be below 128")]
    BadCode(u32),
}

/// Exhaustive-versus-sampled sweep settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Enumerate every subset when there are at most this many.
    pub exhaustive_limit: u64,
    /// Number of seeded samples otherwise.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            exhaustive_limit: 1_000_000,
            samples: 10_000,
            seed: 42,
        }
    }
}

/// Violations kept verbatim in a verdict; the rest are only counted.
pub const MAX_REPORTED: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub lemma_id: String,
    pub instances_checked: u64,
    pub violation_count: u64,
    /// The first [`MAX_REPORTED`] violations.
    pub violations: Vec<String>,
    pub seed: Option<u64>,
    pub runtime_ms: u64,
}

impl LemmaVerdict {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} instances, {} violations{}",
            self.lemma_id,
            self.instances_checked,
            self.violation_count,
            self.seed.map(|s| format!(" (seed {s})")).unwrap_or_default()
        )
    }
}

/// Accumulates instance outcomes in a fixed order.
pub(crate) struct Tally {
    id: &'static str,
    start: Instant,
    instances: u64,
    violation_count: u64,
    violations: Vec<String>,
    seed: Option<u64>,
}

impl Tally {
    pub(crate) fn new(id: &'static str) -> Self {
        Tally {
            id,
            start: Instant::now(),
            instances: 0,
            violation_count: 0,
            violations: Vec::new(),
            seed: None,
        }
    }

    pub(crate) fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub(crate) fn record(&mut self, violation: Option<String>) {
        self.instances += 1;
        if let Some(v) = violation {
            self.violation_count += 1;
            if self.violations.len() < MAX_REPORTED {
                self.violations.push(v);
            }
        }
    }

    pub(crate) fn finish(self) -> LemmaVerdict {
        LemmaVerdict {
            lemma_id: self.id.to_string(),
            instances_checked: self.instances,
            violation_count: self.violation_count,
            violations: self.violations,
            seed: self.seed,
            runtime_ms: self.start.elapsed().as_millis() as u64,
        }
    }
}
