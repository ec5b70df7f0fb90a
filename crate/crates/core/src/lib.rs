//! Strassen computational DAGs, red-blue pebbling and I/O lower bounds.
//!
//! The crate is organised by concern:
//!
//! - [`cdag`]: immutable computational DAGs, JSON and DOT I/O, isomorphism.
//! - [`builders`]: Strassen, definition-based and Strassen-like CDAGs.
//! - [`pebbles`]: schedules, the red-blue pebble game validator and
//!   schedule generators.
//! - [`domflow`]: minimum dominators by vertex min-cut, a brute-force oracle
//!   and Grigoriev flow.
//! - [`bounds`]: closed-form I/O lower bounds.
//! - [`lemma`]: exhaustive and sampled checks of the combinatorial lemmas.

pub mod bounds;
pub mod builders;
pub mod cdag;
pub mod domflow;
pub mod lemma;
pub mod pebbles;
pub mod vertex;

pub use bounds::{BoundError, BoundParams, BoundValue, Formula, Regime};
pub use builders::{
    build_decoder, build_encoder, build_naive, build_strassen, build_strassen_like, BuildError,
    BuildReport, Side, StrassenLikeSpec,
};
pub use cdag::{Cdag, CdagError, DraftCdag, Meta, SubCdagFamily};
pub use domflow::{
    brute_force_min_dominator, min_dominator, min_postdominator, DominatorQuery, DominatorResult,
    DomflowError,
};
pub use lemma::{LemmaError, LemmaVerdict, SweepOptions};
pub use pebbles::{
    generate_blocked_schedule, generate_naive_schedule, validate_schedule, IoStats, Mode, Move,
    MoveKind, Schedule,
};
pub use vertex::{Role, VertexId};
