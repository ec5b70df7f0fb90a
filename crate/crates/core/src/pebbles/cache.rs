//! Turning a compute order into a full move sequence.
//!
//! Values are loaded on demand. When the cache is full the red value whose
//! next use is furthest away is evicted, after a store if it is still needed
//! and not yet in slow memory. Values with no remaining use are evicted as
//! soon as they die, and outputs are stored right after they are computed.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{Move, Schedule};
use crate::cdag::Cdag;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CachePlanError {
    #[error("cache of {cache} words cannot hold the {needed} operands and result of {vertex}")]
    CacheTooSmall {
        cache: usize,
        needed: usize,
        vertex: String,
    },
    #[error("{0} is scheduled before one of its operands")]
    OutOfOrder(String),
    #[error("{0} appears more than once in the compute order")]
    Repeated(String),
}

const NEVER: u32 = u32::MAX;

struct Planner<'g> {
    g: &'g Cdag,
    cache: usize,
    red: Vec<bool>,
    blue: Vec<bool>,
    red_count: usize,
    /// Compute steps at which each vertex is an operand (CSR).
    use_start: Vec<u32>,
    uses: Vec<u32>,
    cursor: Vec<u32>,
    /// Red vertices that still have a use, keyed by next use.
    live: BTreeSet<(u32, u32)>,
    moves: Vec<Move>,
}

impl Planner<'_> {
    fn next_use(&self, v: u32) -> u32 {
        let c = self.cursor[v as usize];
        if c < self.use_start[v as usize + 1] {
            self.uses[c as usize]
        } else {
            NEVER
        }
    }

    fn make_room(&mut self, protected: &[u32], v: u32) -> Result<(), CachePlanError> {
        while self.red_count >= self.cache {
            let victim = self
                .live
                .iter()
                .rev()
                .map(|&(_, u)| u)
                .find(|u| !protected.contains(u));
            let Some(u) = victim else {
                return Err(CachePlanError::CacheTooSmall {
                    cache: self.cache,
                    needed: protected.len(),
                    vertex: self.g.id(v).to_string(),
                });
            };
            if !self.blue[u as usize] {
                self.moves.push(Move::store(u));
                self.blue[u as usize] = true;
            }
            self.drop_red(u);
        }
        Ok(())
    }

    fn drop_red(&mut self, u: u32) {
        self.live.remove(&(self.next_use(u), u));
        self.red[u as usize] = false;
        self.red_count -= 1;
        self.moves.push(Move::evict(u));
    }

    fn add_red(&mut self, u: u32) {
        self.red[u as usize] = true;
        self.red_count += 1;
        let nu = self.next_use(u);
        if nu != NEVER {
            self.live.insert((nu, u));
        }
    }
}

/// Moves executing `order` (each non-input vertex once, operands first) with
/// a cache of `cache` words. Every vertex is computed exactly once.
pub fn plan_moves(g: &Cdag, order: &[u32], cache: usize) -> Result<Schedule, CachePlanError> {
    let n = g.vertex_count();
    let mut step_of = vec![NEVER; n];
    for (t, &v) in order.iter().enumerate() {
        if step_of[v as usize] != NEVER {
            return Err(CachePlanError::Repeated(g.id(v).to_string()));
        }
        step_of[v as usize] = t as u32;
    }
    let mut use_start = vec![0u32; n + 1];
    for &v in order {
        for &u in g.preds(v) {
            use_start[u as usize + 1] += 1;
        }
    }
    for i in 0..n {
        use_start[i + 1] += use_start[i];
    }
    let mut fill = use_start.clone();
    let mut uses = vec![0u32; use_start[n] as usize];
    for (t, &v) in order.iter().enumerate() {
        for &u in g.preds(v) {
            uses[fill[u as usize] as usize] = t as u32;
            fill[u as usize] += 1;
        }
    }
    let mut p = Planner {
        g,
        cache,
        red: vec![false; n],
        blue: vec![false; n],
        red_count: 0,
        cursor: use_start[..n].to_vec(),
        use_start,
        uses,
        live: BTreeSet::new(),
        moves: Vec::with_capacity(order.len() * 4),
    };
    for &v in g.inputs() {
        p.blue[v as usize] = true;
    }

    let mut protected: Vec<u32> = Vec::with_capacity(8);
    for (t, &v) in order.iter().enumerate() {
        let t = t as u32;
        protected.clear();
        protected.extend_from_slice(g.preds(v));
        protected.push(v);
        if protected.len() > cache {
            return Err(CachePlanError::CacheTooSmall {
                cache,
                needed: protected.len(),
                vertex: g.id(v).to_string(),
            });
        }
        for &u in g.preds(v) {
            if !p.red[u as usize] {
                if !p.blue[u as usize] {
                    return Err(CachePlanError::OutOfOrder(g.id(v).to_string()));
                }
                p.make_room(&protected, v)?;
                p.moves.push(Move::load(u));
                p.add_red(u);
            }
        }
        p.make_room(&protected, v)?;
        p.moves.push(Move::compute(v));
        p.add_red(v);

        for &u in g.preds(v) {
            let before = p.next_use(u);
            debug_assert_eq!(before, t);
            p.live.remove(&(before, u));
            p.cursor[u as usize] += 1;
            let after = p.next_use(u);
            if after == NEVER {
                if g.is_output(u) && !p.blue[u as usize] {
                    p.moves.push(Move::store(u));
                    p.blue[u as usize] = true;
                }
                p.red[u as usize] = false;
                p.red_count -= 1;
                p.moves.push(Move::evict(u));
            } else {
                p.live.insert((after, u));
            }
        }
        if g.is_output(v) {
            p.moves.push(Move::store(v));
            p.blue[v as usize] = true;
        }
        if p.next_use(v) == NEVER {
            p.drop_red(v);
        }
    }
    Ok(Schedule {
        moves: p.moves,
        declared_cache: cache,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::build_strassen;
    use crate::pebbles::{validate_schedule, Mode};

    #[test]
    fn h1_plan_is_minimal() {
        let (g, _) = build_strassen(1).unwrap();
        let s = plan_moves(&g, &[g.outputs()[0]], 3).unwrap();
        let st = validate_schedule(&g, &s, 3, Mode::NoRecompute).unwrap();
        assert_eq!(st.io_total, 3);
        assert!(matches!(
            plan_moves(&g, &[g.outputs()[0]], 2),
            Err(CachePlanError::CacheTooSmall { needed: 3, .. })
        ));
    }

    #[test]
    fn topological_order_always_validates() {
        let (g, _) = build_strassen(4).unwrap();
        let order: Vec<u32> = g.topo_order().iter().copied().filter(|&v| !g.is_input(v)).collect();
        for m in [5, 8, 16, 64, 1000] {
            let s = plan_moves(&g, &order, m).unwrap();
            validate_schedule(&g, &s, m, Mode::NoRecompute).unwrap();
        }
        assert!(plan_moves(&g, &order, 4).is_err());
    }

    #[test]
    fn rejects_bad_orders() {
        let (g, _) = build_strassen(2).unwrap();
        let order: Vec<u32> = g.topo_order().iter().copied().filter(|&v| !g.is_input(v)).collect();
        let mut rev = order.clone();
        rev.reverse();
        assert!(matches!(plan_moves(&g, &rev, 50), Err(CachePlanError::OutOfOrder(_))));
        let mut dup = order.clone();
        dup.push(order[0]);
        assert!(matches!(plan_moves(&g, &dup, 50), Err(CachePlanError::Repeated(_))));
    }
}
