//! The red-blue pebble game.
//!
//! Red pebbles are values held in a cache of `M` words, blue pebbles are
//! values in slow memory. A [`Schedule`] is a sequence of [`Move`]s; loads
//! and stores are the I/O operations. Computing a vertex needs every operand
//! red and places a new red pebble, so a vertex of in-degree `k` needs `k + 1`
//! red pebbles at once. Eviction is free.

mod cache;
mod generate;
mod trace;
mod validate;

use serde::{Deserialize, Serialize};
use crate::cdag::Cdag;

pub use cache::{plan_moves, CachePlanError};
pub use generate::{
    blocked_order, blocking_cutoff, generate_blocked_schedule, generate_blocked_schedule_for,
    generate_naive_schedule, generate_naive_schedule_for, min_blocked_cache, naive_order,
    naive_tile, working_set, BlockedOptions, EncoderOrder, GenerateError, NAIVE_MIN_CACHE,
};
pub use trace::{read_trace, read_trace_lines, write_trace, TraceError, TRACE_SCHEMA};
pub use validate::{validate_schedule, Mode, ValidationError, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Load,
    Store,
    Compute,
    Evict,
}

impl MoveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::Load => "load",
            MoveKind::Store => "store",
            MoveKind::Compute => "compute",
            MoveKind::Evict => "evict",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub kind: MoveKind,
    pub vertex: u32,
}

impl Move {
    pub fn load(v: u32) -> Self {
        Move { kind: MoveKind::Load, vertex: v }
    }
    pub fn store(v: u32) -> Self {
        Move { kind: MoveKind::Store, vertex: v }
    }
    pub fn compute(v: u32) -> Self {
        Move { kind: MoveKind::Compute, vertex: v }
    }
    pub fn evict(v: u32) -> Self {
        Move { kind: MoveKind::Evict, vertex: v }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub moves: Vec<Move>,
    /// Cache size the schedule was produced for.
    pub declared_cache: usize,
}

impl Schedule {
    pub fn io_count(&self) -> usize {
        self.moves
            .iter()
            .filter(|m| matches!(m.kind, MoveKind::Load | MoveKind::Store))
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IoStats {
    pub io_total: u64,
    pub loads: u64,
    pub stores: u64,
    pub computes: u64,
    pub peak_red: usize,
    pub recomputed_vertices: u64,
}

/// Measured I/O of a schedule set against a lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoComparison {
    pub measured_io: u64,
    pub bound_value: f64,
    /// `measured / max(bound, 1)`.
    pub ratio: f64,
    /// The schedule beats the bound, which means the implementation is wrong.
    pub violation: bool,
    pub stats: IoStats,
}

/// Replays `s` on `g` and compares its I/O with `bound`.
pub fn io_lower_report(
    g: &Cdag,
    s: &Schedule,
    cache: usize,
    mode: Mode,
    bound: f64,
) -> Result<IoComparison, ValidationError> {
    let stats = validate_schedule(g, s, cache, mode)?;
    let measured = stats.io_total;
    Ok(IoComparison {
        measured_io: measured,
        bound_value: bound,
        ratio: measured as f64 / bound.max(1.0),
        violation: (measured as f64) < bound,
        stats,
    })
}
