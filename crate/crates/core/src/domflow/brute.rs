//! Exhaustive dominator search, used as an oracle for the min-cut code.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{separates, DominatorQuery, DominatorResult, DomflowError, Method};
use crate::cdag::{Cdag, DraftCdag, Meta};
use crate::vertex::{Role, VertexId};

/// Smallest (post-)dominator found by trying vertex subsets in order of
/// size. Only vertices lying on some source-to-sink path are candidates,
/// since a minimum cut never needs any other vertex.
pub fn brute_force_min_dominator(
    q: &DominatorQuery,
    max_size: usize,
) -> Result<DominatorResult, DomflowError> {
    let g = q.graph;
    if g.vertex_count() > 40 && max_size > 4 {
        return Err(DomflowError::OracleTooLarge);
    }
    let (sources, sinks) = q.endpoints()?;
    let none = vec![false; g.vertex_count()];
    let fwd = g.reachable_from(&sources, &none);
    let back = g.reaches(&sinks, &none);
    let mut cand: Vec<u32> = (0..g.vertex_count() as u32)
        .filter(|&v| fwd[v as usize] && back[v as usize])
        .collect();
    cand.sort_by_key(|&v| g.topo_pos(v));

    let mut pick: Vec<usize> = Vec::with_capacity(max_size);
    let mut set: Vec<u32> = Vec::with_capacity(max_size);
    for k in 0..=max_size.min(cand.len()) {
        pick.clear();
        pick.extend(0..k);
        loop {
            set.clear();
            set.extend(pick.iter().map(|&i| cand[i]));
            if separates(g, &sources, &sinks, &set) {
                return Ok(DominatorResult {
                    size: k,
                    witness: set,
                    method: Method::Brute,
                });
            }
            if !next_combination(&mut pick, cand.len()) {
                break;
            }
        }
    }
    Err(DomflowError::Exhausted { max_size })
}

/// Random DAG with `vertices` vertices for oracle comparisons. The first
/// few vertices are inputs, every other vertex draws one to three
/// predecessors among earlier vertices, and sinks are outputs.
pub fn random_dag<R: Rng>(vertices: usize, rng: &mut R) -> Cdag {
    assert!(vertices >= 2, "need at least two vertices");
    let inputs = rng.gen_range(1..=(vertices / 3).max(1));
    let mut d = DraftCdag::new(Meta::new("random", serde_json::json!({ "vertices": vertices })));
    for i in 0..vertices as u32 {
        let role = if (i as usize) < inputs { Role::InputA } else { Role::Sum };
        d.add_vertex(VertexId::new(&[], role, &[i]));
    }
    let mut has_succ = vec![false; vertices];
    let earlier: Vec<u32> = (0..vertices as u32).collect();
    for v in inputs..vertices {
        let k = rng.gen_range(1..=3usize).min(v);
        for &u in earlier[..v].choose_multiple(rng, k) {
            d.add_edge(u, v as u32);
            has_succ[u as usize] = true;
        }
    }
    for v in 0..inputs as u32 {
        d.declare_input(v);
    }
    for v in 0..vertices as u32 {
        if !has_succ[v as usize] {
            d.declare_output(v);
        }
    }
    d.seal().expect("random DAG is well formed")
}

/// Advances `pick` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(pick: &mut [usize], n: usize) -> bool {
    let k = pick.len();
    let Some(i) = (0..k).rev().find(|&i| pick[i] < n - k + i) else {
        return false;
    };
    pick[i] += 1;
    for j in i + 1..k {
        pick[j] = pick[j - 1] + 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::next_combination;

    #[test]
    fn combinations_are_complete() {
        let mut p = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut p, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
        assert!(!next_combination(&mut [], 3));
    }
}
