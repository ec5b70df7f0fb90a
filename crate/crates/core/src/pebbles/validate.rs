use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{IoStats, MoveKind, Schedule};
use crate::cdag::Cdag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Any vertex may be computed any number of times.
    #[default]
    Free,
    /// Every vertex is computed at most once.
    NoRecompute,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("cache size must be at least 1")]
    ZeroCache,
    #[error("vertex #{0} does not exist")]
    UnknownVertex(u32),
    #[error("cache overflow: {red} red pebbles with cache {cache}")]
    CacheOverflow { red: usize, cache: usize },
    #[error("compute of {vertex} without operand {operand} in cache")]
    MissingOperand { vertex: String, operand: String },
    #[error("compute of input vertex {0}")]
    ComputeInput(String),
    #[error("load of {0}, which is not in slow memory")]
    LoadNotBlue(String),
    #[error("load of {0}, whose value was discarded without a store")]
    ValueLost(String),
    #[error("store of {0}, which is not in cache")]
    StoreNotRed(String),
    #[error("evict of {0}, which is not in cache")]
    EvictNotRed(String),
    #[error("{0} computed more than once")]
    Recompute(String),
    #[error("output {0} not in slow memory at the end")]
    OutputNotBlue(String),
}

/// A rejected schedule: the offending move index (`moves.len()` for end-of-run
/// checks) and what went wrong.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationError {
    pub index: usize,
    pub kind: Violation,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "move {}: {}", self.index, self.kind)
    }
}

/// Replays `s` on `g` with a cache of `cache` words.
///
/// All inputs start blue and nothing is red. Every output must be blue once
/// the moves run out.
pub fn validate_schedule(
    g: &Cdag,
    s: &Schedule,
    cache: usize,
    mode: Mode,
) -> Result<IoStats, ValidationError> {
    let fail = |index, kind| Err(ValidationError { index, kind });
    if cache == 0 {
        return fail(0, Violation::ZeroCache);
    }
    let n = g.vertex_count();
    let name = |v: u32| g.id(v).to_string();
    let mut red = vec![false; n];
    let mut blue = vec![false; n];
    let mut computed = vec![0u32; n];
    for &v in g.inputs() {
        blue[v as usize] = true;
    }
    let mut red_count = 0usize;
    let mut st = IoStats::default();

    for (i, m) in s.moves.iter().enumerate() {
        let v = m.vertex;
        if v as usize >= n {
            return fail(i, Violation::UnknownVertex(v));
        }
        let vi = v as usize;
        match m.kind {
            MoveKind::Load => {
                if !blue[vi] {
                    let kind = if mode == Mode::NoRecompute && computed[vi] > 0 && !red[vi] {
                        Violation::ValueLost(name(v))
                    } else {
                        Violation::LoadNotBlue(name(v))
                    };
                    return fail(i, kind);
                }
                st.loads += 1;
                if !red[vi] {
                    red[vi] = true;
                    red_count += 1;
                }
            }
            MoveKind::Store => {
                if !red[vi] {
                    return fail(i, Violation::StoreNotRed(name(v)));
                }
                st.stores += 1;
                blue[vi] = true;
            }
            MoveKind::Compute => {
                if g.is_input(v) {
                    return fail(i, Violation::ComputeInput(name(v)));
                }
                if let Some(&u) = g.preds(v).iter().find(|&&u| !red[u as usize]) {
                    return fail(
                        i,
                        Violation::MissingOperand {
                            vertex: name(v),
                            operand: name(u),
                        },
                    );
                }
                if mode == Mode::NoRecompute && computed[vi] > 0 {
                    return fail(i, Violation::Recompute(name(v)));
                }
                computed[vi] += 1;
                st.computes += 1;
                if computed[vi] == 2 {
                    st.recomputed_vertices += 1;
                }
                if !red[vi] {
                    red[vi] = true;
                    red_count += 1;
                }
            }
            MoveKind::Evict => {
                if !red[vi] {
                    return fail(i, Violation::EvictNotRed(name(v)));
                }
                red[vi] = false;
                red_count -= 1;
            }
        }
        if red_count > cache {
            return fail(
                i,
                Violation::CacheOverflow {
                    red: red_count,
                    cache,
                },
            );
        }
        st.peak_red = st.peak_red.max(red_count);
    }
    if let Some(&o) = g.outputs().iter().find(|&&o| !blue[o as usize]) {
        return fail(s.moves.len(), Violation::OutputNotBlue(name(o)));
    }
    st.io_total = st.loads + st.stores;
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::build_strassen;
    use crate::pebbles::Move;
    use proptest::prelude::*;

    fn h1() -> (Cdag, u32, u32, u32) {
        let (g, _) = build_strassen(1).unwrap();
        let (a, b, c) = (g.inputs()[0], g.inputs()[1], g.outputs()[0]);
        (g, a, b, c)
    }

    fn sched(moves: Vec<Move>) -> Schedule {
        Schedule {
            moves,
            declared_cache: 0,
        }
    }

    #[test]
    fn minimal_run() {
        let (g, a, b, c) = h1();
        let s = sched(vec![Move::load(a), Move::load(b), Move::compute(c), Move::store(c)]);
        let st = validate_schedule(&g, &s, 3, Mode::NoRecompute).unwrap();
        assert_eq!((st.io_total, st.computes, st.peak_red), (3, 1, 3));
        let err = validate_schedule(&g, &s, 2, Mode::Free).unwrap_err();
        assert_eq!(err.index, 2);
        assert!(matches!(err.kind, Violation::CacheOverflow { red: 3, cache: 2 }));
    }

    #[test]
    fn typed_errors() {
        let (g, a, b, c) = h1();
        let run = |moves, mode| validate_schedule(&g, &sched(moves), 3, mode).unwrap_err().kind;
        assert!(matches!(
            run(vec![Move::load(a), Move::compute(c)], Mode::Free),
            Violation::MissingOperand { .. }
        ));
        assert!(matches!(run(vec![Move::load(c)], Mode::Free), Violation::LoadNotBlue(_)));
        assert!(matches!(run(vec![Move::store(a)], Mode::Free), Violation::StoreNotRed(_)));
        assert!(matches!(run(vec![Move::evict(a)], Mode::Free), Violation::EvictNotRed(_)));
        assert!(matches!(run(vec![Move::compute(a)], Mode::Free), Violation::ComputeInput(_)));
        assert!(matches!(
            run(vec![Move::load(a), Move::load(b), Move::compute(c)], Mode::Free),
            Violation::OutputNotBlue(_)
        ));
        assert!(matches!(run(vec![Move::load(99)], Mode::Free), Violation::UnknownVertex(99)));
        let again = vec![
            Move::load(a),
            Move::load(b),
            Move::compute(c),
            Move::evict(c),
            Move::compute(c),
            Move::store(c),
        ];
        assert!(matches!(run(again.clone(), Mode::NoRecompute), Violation::Recompute(_)));
        let st = validate_schedule(&g, &sched(again), 3, Mode::Free).unwrap();
        assert_eq!(st.recomputed_vertices, 1);
        let lost = vec![Move::load(a), Move::load(b), Move::compute(c), Move::evict(c), Move::load(c)];
        assert!(matches!(run(lost, Mode::NoRecompute), Violation::ValueLost(_)));
        assert_eq!(
            validate_schedule(&g, &sched(vec![]), 0, Mode::Free).unwrap_err().kind,
            Violation::ZeroCache
        );
    }

    proptest! {
        #[test]
        fn total_on_arbitrary_moves(
            raw in proptest::collection::vec((0u8..4, 0u32..40), 0..60),
            cache in 0usize..8,
            strict in any::<bool>(),
        ) {
            let (g, _) = build_strassen(2).unwrap();
            let moves = raw.into_iter().map(|(k, v)| match k {
                0 => Move::load(v),
                1 => Move::store(v),
                2 => Move::compute(v),
                _ => Move::evict(v),
            }).collect();
            let mode = if strict { Mode::NoRecompute } else { Mode::Free };
            if let Ok(st) = validate_schedule(&g, &sched(moves), cache, mode) {
                prop_assert_eq!(st.io_total, st.loads + st.stores);
                prop_assert!(st.peak_red <= cache);
            }
        }
    }
}
