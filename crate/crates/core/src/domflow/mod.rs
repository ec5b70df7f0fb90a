//! Dominators, post-dominators and information flow.
//!
//! A dominator of a target set `V'` is a vertex set met by every path from
//! a global input to `V'`; a post-dominator of a source set w.r.t. outputs
//! `O'` is met by every path from a source to `O'`. Both are minimum vertex
//! cuts, computed exactly by unit-capacity max-flow ([`CutSolver`]). Any
//! vertex may be cut, including sources and targets.

mod brute;
mod cut;
mod flow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cdag::{Cdag, SubCdagFamily};

pub use brute::{brute_force_min_dominator, random_dag};
pub use cut::{separates, Cut, CutSolver};
pub use flow::{empirical_flow, flow_lower_bound, FlowQuery, EMPIRICAL_FLOW_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomflowError {
    #[error("the target set is empty")]
    EmptyTargets,
    #[error("vertex #{0} does not exist")]
    UnknownVertex(u32),
    #[error("source {0} is an output vertex")]
    SourceIsOutput(String),
    #[error("{0} is not an output vertex")]
    NotAnOutput(String),
    #[error("brute-force search exhausted: no dominator of size <= {max_size}")]
    Exhausted { max_size: usize },
    #[error("brute-force search needs a graph of at most 40 vertices or max_size <= 4")]
    OracleTooLarge,
    #[error("{0} is an input of the family and cannot be in the cut")]
    InputInCut(String),
    #[error("{0} is not inside a member of the family")]
    NotInFamily(String),
    #[error("invalid flow query: {0}")]
    InvalidFlowQuery(String),
    #[error("enumeration of {work} evaluations exceeds the cap of {cap}")]
    InstanceTooLarge { work: u128, cap: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominatorMode {
    Dominator,
    PostDominator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    MinCut,
    Brute,
}

/// A (post-)dominator question about one graph.
#[derive(Debug, Clone)]
pub struct DominatorQuery<'g> {
    pub graph: &'g Cdag,
    pub mode: DominatorMode,
    /// `V'` for a dominator query, the source set for a post-dominator query.
    pub targets: Vec<u32>,
    /// `O'`; empty for dominator queries.
    pub outputs: Vec<u32>,
}

impl<'g> DominatorQuery<'g> {
    pub fn dominator(graph: &'g Cdag, targets: &[u32]) -> Self {
        DominatorQuery {
            graph,
            mode: DominatorMode::Dominator,
            targets: targets.to_vec(),
            outputs: Vec::new(),
        }
    }

    pub fn post_dominator(graph: &'g Cdag, sources: &[u32], outputs: &[u32]) -> Self {
        DominatorQuery {
            graph,
            mode: DominatorMode::PostDominator,
            targets: sources.to_vec(),
            outputs: outputs.to_vec(),
        }
    }

    /// Path sources and sinks of the underlying cut problem.
    pub fn endpoints(&self) -> Result<(Vec<u32>, Vec<u32>), DomflowError> {
        let g = self.graph;
        if self.targets.is_empty() {
            return Err(DomflowError::EmptyTargets);
        }
        let n = g.vertex_count() as u32;
        if let Some(&v) = self.targets.iter().chain(&self.outputs).find(|&&v| v >= n) {
            return Err(DomflowError::UnknownVertex(v));
        }
        match self.mode {
            DominatorMode::Dominator => Ok((g.inputs().to_vec(), self.targets.clone())),
            DominatorMode::PostDominator => {
                if self.outputs.is_empty() {
                    return Err(DomflowError::EmptyTargets);
                }
                if let Some(&s) = self.targets.iter().find(|&&s| g.is_output(s)) {
                    return Err(DomflowError::SourceIsOutput(g.id(s).to_string()));
                }
                if let Some(&o) = self.outputs.iter().find(|&&o| !g.is_output(o)) {
                    return Err(DomflowError::NotAnOutput(g.id(o).to_string()));
                }
                Ok((self.targets.clone(), self.outputs.clone()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominatorResult {
    pub size: usize,
    pub witness: Vec<u32>,
    pub method: Method,
}

/// Minimum dominator (or post-dominator, per `q.mode`) by min-cut.
pub fn min_dominator(q: &DominatorQuery) -> Result<DominatorResult, DomflowError> {
    let mut solver = CutSolver::new(q.graph);
    min_dominator_with(&mut solver, q)
}

/// Minimum post-dominator of `q.targets` w.r.t. `q.outputs`.
pub fn min_postdominator(q: &DominatorQuery) -> Result<DominatorResult, DomflowError> {
    let q = DominatorQuery {
        mode: DominatorMode::PostDominator,
        ..q.clone()
    };
    min_dominator(&q)
}

/// [`min_dominator`] reusing a prepared solver for the same graph.
pub fn min_dominator_with(
    solver: &mut CutSolver,
    q: &DominatorQuery,
) -> Result<DominatorResult, DomflowError> {
    let (sources, sinks) = q.endpoints()?;
    let cut = solver.min_cut(&sources, &sinks);
    debug_assert!(
        separates(q.graph, &sources, &sinks, &cut.vertices),
        "min-cut witness leaves a path"
    );
    Ok(DominatorResult {
        size: cut.flow,
        witness: cut.vertices,
        method: Method::MinCut,
    })
}

/// True when `gamma` is a (post-)dominator for `q`.
pub fn is_dominator(q: &DominatorQuery, gamma: &[u32]) -> Result<bool, DomflowError> {
    let (sources, sinks) = q.endpoints()?;
    Ok(separates(q.graph, &sources, &sinks, gamma))
}

/// Maximum number of vertex-disjoint paths from `sources` to `sinks`.
pub fn max_disjoint_paths(g: &Cdag, sources: &[u32], sinks: &[u32]) -> usize {
    CutSolver::new(g).min_cut(sources, sinks).flow
}

/// Result of [`check_internal_flow_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalFlowCheck {
    /// Member inputs with a path to `O'` avoiding the cut.
    pub not_post_dominated: usize,
    /// `2 n sqrt(|O'| - 2|cut|)` when the radicand is positive.
    pub bound: Option<f64>,
    pub holds: bool,
}

/// Counts the member inputs of `family` that `gamma` does not post-dominate
/// w.r.t. `o_prime`, and compares the count with `2 n sqrt(|O'| - 2|gamma|)`
/// where `n` is the member block dimension.
pub fn check_internal_flow_bound(
    g: &Cdag,
    family: &SubCdagFamily,
    o_prime: &[u32],
    gamma: &[u32],
) -> Result<InternalFlowCheck, DomflowError> {
    let n = g.vertex_count();
    let mut owner = vec![usize::MAX; n];
    for (k, m) in family.members.iter().enumerate() {
        for &v in m {
            owner[v as usize] = k;
        }
    }
    let member_input = |v: u32| {
        let k = owner[v as usize];
        k != usize::MAX && !g.preds(v).iter().any(|&u| owner[u as usize] == k)
    };
    for &v in gamma.iter().chain(o_prime) {
        if v as usize >= n {
            return Err(DomflowError::UnknownVertex(v));
        }
        if owner[v as usize] == usize::MAX {
            return Err(DomflowError::NotInFamily(g.id(v).to_string()));
        }
    }
    if let Some(&v) = gamma.iter().find(|&&v| member_input(v)) {
        return Err(DomflowError::InputInCut(g.id(v).to_string()));
    }
    let mut blocked = vec![false; n];
    for &v in gamma {
        blocked[v as usize] = true;
    }
    let reach = g.reaches(o_prime, &blocked);
    let count = (0..n as u32)
        .filter(|&v| member_input(v) && reach[v as usize])
        .count();
    let bound = crate::bounds::internal_flow_bound(family.block_dim, o_prime.len(), gamma.len());
    Ok(InternalFlowCheck {
        not_post_dominated: count,
        bound,
        holds: bound.is_none_or(|b| count as f64 >= b - 1e-9),
    })
}

#[cfg(test)]
mod tests;
