//! Schedule generators for the recursive and definition-based CDAGs.

use thiserror::Error;

use super::cache::{plan_moves, CachePlanError};
use super::Schedule;
use crate::builders::{
    build_naive, build_strassen_full, rebuild_recursive, BuildError, BuildOptions, RecursionTree,
    RecursiveBuild, StrassenLikeSpec,
};
use crate::cdag::Cdag;
use crate::vertex::{Role, VertexId};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("cache of {cache} words is below the minimum of {min} for this graph")]
    CacheTooSmall { cache: usize, min: usize },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Plan(#[from] CachePlanError),
}

/// How sub-problems well above the blocking cutoff obtain their operands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncoderOrder {
    /// All encoder outputs of a sub-problem are computed, entry by entry,
    /// before its first child runs.
    #[default]
    Materialize,
    /// Each child's operands are computed right before the child runs.
    JustInTime,
}

/// Knobs of the blocked generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockedOptions {
    pub upper: EncoderOrder,
    /// Child order inside in-cache sub-problems.
    pub base_order: Vec<usize>,
    /// Child order one level above the cutoff.
    pub parent_order: Vec<usize>,
}

// Found by exhaustive search over child permutations on H^{8x8} with M = 16.
const STRASSEN_BASE_ORDER: [usize; 7] = [5, 6, 2, 4, 0, 1, 3];
const STRASSEN_PARENT_ORDER: [usize; 7] = [1, 5, 3, 0, 2, 4, 6];

impl BlockedOptions {
    /// Natural child order everywhere.
    pub fn plain(m0: usize) -> Self {
        BlockedOptions {
            upper: EncoderOrder::Materialize,
            base_order: (0..m0).collect(),
            parent_order: (0..m0).collect(),
        }
    }

    /// Tuned orders for Strassen's scheme, natural order otherwise.
    pub fn for_build(build: &RecursiveBuild) -> Self {
        let meta = build.cdag.meta();
        let strassen = meta.builder == "strassen"
            || (meta.builder == "like"
                && serde_json::from_value::<StrassenLikeSpec>(meta.params["spec"].clone())
                    .is_ok_and(|s| s == StrassenLikeSpec::strassen()));
        if strassen {
            BlockedOptions {
                upper: EncoderOrder::Materialize,
                base_order: STRASSEN_BASE_ORDER.to_vec(),
                parent_order: STRASSEN_PARENT_ORDER.to_vec(),
            }
        } else {
            Self::plain(build.tree.m0)
        }
    }
}

fn entry_of(id: &VertexId, h: usize) -> usize {
    id.index[1] as usize * h + id.index[2] as usize
}

/// Own encoder vertices of `node`, grouped by child.
fn encoder_vertices(g: &Cdag, tree: &RecursionTree, node: usize) -> Vec<Vec<u32>> {
    let nd = &tree.nodes[node];
    let mut by_child = vec![Vec::new(); tree.m0];
    for v in nd.created.0..nd.enc_end {
        let k = g.id(v).index[0] as usize - 1;
        by_child[k].push(v);
    }
    by_child
}

/// Own decoder vertices of `node`, entry-major across output blocks.
fn decoder_vertices(g: &Cdag, tree: &RecursionTree, node: usize) -> Vec<u32> {
    let nd = &tree.nodes[node];
    let h = nd.dim / tree.n0;
    let mut vs: Vec<u32> = (nd.dec_start..nd.created.1).collect();
    vs.sort_by_key(|&v| {
        let id = g.id(v);
        let (r, c) = (id.index[0] as usize, id.index[1] as usize);
        ((r % h) * h + c % h, (r / h) * tree.n0 + c / h)
    });
    vs
}

struct OrderCtx<'a> {
    g: &'a Cdag,
    tree: &'a RecursionTree,
    base_dim: usize,
    opts: &'a BlockedOptions,
}

impl OrderCtx<'_> {
    fn push(&self, node: usize, out: &mut Vec<u32>) {
        let (g, tree) = (self.g, self.tree);
        let nd = &tree.nodes[node];
        if nd.dim == 1 {
            out.extend(nd.created.0..nd.created.1);
            return;
        }
        let enc = encoder_vertices(g, tree, node);
        let natural: Vec<usize> = (0..tree.m0).collect();
        let (jit, order) = if nd.dim <= self.base_dim {
            (true, &self.opts.base_order)
        } else if nd.dim == self.base_dim * tree.n0 {
            (true, &self.opts.parent_order)
        } else {
            (self.opts.upper == EncoderOrder::JustInTime, &natural)
        };
        if !jit {
            let h = nd.dim / tree.n0;
            let mut all: Vec<u32> = enc.concat();
            all.sort_by_key(|&v| {
                let id = g.id(v);
                (entry_of(id, h), id.role == Role::EncB, id.index[0])
            });
            out.extend(all);
        }
        for &k in order {
            if jit {
                out.extend(&enc[k]);
            }
            self.push(nd.children[k], out);
        }
        out.extend(decoder_vertices(g, tree, node));
    }
}

/// Compute order of the blocked schedule. Sub-problems of dimension at most
/// `base_dim` and their parents run child by child, each child's operands
/// computed right before it; larger ones follow `opts.upper`.
pub fn blocked_order(build: &RecursiveBuild, base_dim: usize, opts: &BlockedOptions) -> Vec<u32> {
    let mut out = Vec::with_capacity(build.cdag.vertex_count());
    let ctx = OrderCtx {
        g: &build.cdag,
        tree: &build.tree,
        base_dim,
        opts,
    };
    ctx.push(0, &mut out);
    out
}

/// Peak number of red pebbles when the in-cache order for a dimension-`s`
/// sub-problem runs with unlimited cache.
pub fn working_set(like: &RecursiveBuild, s: usize) -> Result<usize, GenerateError> {
    let b = rebuild_recursive(like.cdag.meta(), s)?;
    let order = blocked_order(&b, s, &BlockedOptions::for_build(&b));
    let sched = plan_moves(&b.cdag, &order, usize::MAX)?;
    Ok(peak_red(&sched))
}

fn peak_red(s: &Schedule) -> usize {
    use super::MoveKind::*;
    let (mut cur, mut peak) = (0usize, 0usize);
    for m in &s.moves {
        match m.kind {
            Load | Compute => {
                cur += 1;
                peak = peak.max(cur);
            }
            Evict => cur -= 1,
            Store => {}
        }
    }
    peak
}

/// Smallest cache the blocked generator accepts for `build`.
pub fn min_blocked_cache(build: &RecursiveBuild) -> usize {
    build.cdag.max_in_degree() + 1
}

/// Largest sub-problem dimension whose in-cache execution fits in `cache`.
pub fn blocking_cutoff(build: &RecursiveBuild, cache: usize) -> Result<usize, GenerateError> {
    let n = build.tree.root().dim;
    let n0 = build.tree.n0;
    let mut best = None;
    let mut s = 1;
    while s <= n {
        if working_set(build, s)? > cache {
            break;
        }
        best = Some(s);
        s *= n0;
    }
    best.ok_or(GenerateError::CacheTooSmall {
        cache,
        min: working_set(build, 1)?,
    })
}

/// Blocked schedule for an already built recursive CDAG.
pub fn generate_blocked_schedule_for(
    build: &RecursiveBuild,
    cache: usize,
    opts: &BlockedOptions,
) -> Result<Schedule, GenerateError> {
    let min = min_blocked_cache(build);
    if cache < min {
        return Err(GenerateError::CacheTooSmall { cache, min });
    }
    let base = blocking_cutoff(build, cache)?;
    let order = blocked_order(build, base, opts);
    Ok(plan_moves(&build.cdag, &order, cache)?)
}

/// Blocked no-recompute schedule for `H^{n x n}` with a cache of `cache`.
pub fn generate_blocked_schedule(n: usize, cache: usize) -> Result<Schedule, GenerateError> {
    let build = build_strassen_full(n, BuildOptions::default())?;
    generate_blocked_schedule_for(&build, cache, &BlockedOptions::for_build(&build))
}

pub const NAIVE_MIN_CACHE: usize = 4;

/// Largest tile width for the definition-based schedule: a `b x b` tile of partial
/// sums, a column of `A`, a row of `B` and two temporaries must fit.
pub fn naive_tile(cache: usize) -> usize {
    (1..).take_while(|b| b * b + 2 * b + 2 <= cache).last().unwrap_or(1)
}

/// Compute order of the definition-based CDAG, tile by tile with the
/// summation index outermost inside a tile.
pub fn naive_order(g: &Cdag, n: usize, tile: usize) -> Vec<u32> {
    let find = |role, idx: [u32; 3]| {
        g.lookup(&VertexId::new(&[], role, &idx))
            .expect("definition-based graph has every product and sum")
    };
    let mut out = Vec::with_capacity(g.vertex_count());
    for i0 in (0..n).step_by(tile) {
        for j0 in (0..n).step_by(tile) {
            for k in 0..n {
                for i in i0..(i0 + tile).min(n) {
                    for j in j0..(j0 + tile).min(n) {
                        let (i, j, k) = (i as u32, j as u32, k as u32);
                        out.push(find(Role::Product, [i, k, j]));
                        if k > 0 {
                            out.push(find(Role::Sum, [i, j, k]));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Tiled schedule for the definition-based CDAG.
pub fn generate_naive_schedule(n: usize, cache: usize) -> Result<Schedule, GenerateError> {
    if cache < NAIVE_MIN_CACHE {
        return Err(GenerateError::CacheTooSmall {
            cache,
            min: NAIVE_MIN_CACHE,
        });
    }
    let g = build_naive(n)?;
    generate_naive_schedule_for(&g, n, cache)
}

/// Runs every tile width that fits in `cache` and keeps the cheapest
/// schedule, so a larger cache never costs more I/O.
pub fn generate_naive_schedule_for(g: &Cdag, n: usize, cache: usize) -> Result<Schedule, GenerateError> {
    let mut best: Option<Schedule> = None;
    for tile in 1..=naive_tile(cache).min(n.max(1)) {
        let s = plan_moves(g, &naive_order(g, n, tile), cache)?;
        if best.as_ref().is_none_or(|b| s.io_count() < b.io_count()) {
            best = Some(s);
        }
    }
    Ok(best.expect("tile width 1 always fits"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::build_strassen;
    use crate::pebbles::{validate_schedule, Mode};

    fn strassen(n: usize) -> RecursiveBuild {
        build_strassen_full(n, BuildOptions::default()).unwrap()
    }

    #[test]
    fn order_is_a_permutation_of_non_inputs() {
        for n in [1, 2, 4, 8] {
            let b = strassen(n);
            let jit = BlockedOptions { upper: EncoderOrder::JustInTime, ..BlockedOptions::plain(7) };
            for (base, opts) in [(1, BlockedOptions::for_build(&b)), (2, jit), (n, BlockedOptions::plain(7))] {
                let mut o = blocked_order(&b, base, &opts);
                o.sort_unstable();
                let want: Vec<u32> = (0..b.cdag.vertex_count() as u32).filter(|&v| !b.cdag.is_input(v)).collect();
                assert_eq!(o, want);
            }
        }
    }

    #[test]
    fn whole_problem_in_cache_costs_3n2() {
        for n in [1, 2, 4] {
            let b = strassen(n);
            let ws = working_set(&b, n).unwrap();
            let s = generate_blocked_schedule_for(&b, ws, &BlockedOptions::for_build(&b)).unwrap();
            let st = validate_schedule(&b.cdag, &s, ws, Mode::NoRecompute).unwrap();
            assert_eq!(st.io_total as usize, 3 * n * n, "n = {n}");
        }
    }

    #[test]
    fn minimum_cache_is_measured() {
        let b = strassen(8);
        assert_eq!(min_blocked_cache(&b), 5);
        assert_eq!(working_set(&b, 1).unwrap(), 3);
        assert!(matches!(
            generate_blocked_schedule(8, 4),
            Err(GenerateError::CacheTooSmall { cache: 4, min: 5 })
        ));
        assert_eq!(min_blocked_cache(&strassen(1)), 3);
    }

    #[test]
    fn blocked_schedules_validate() {
        for (n, m) in [(2, 5), (4, 5), (8, 8), (8, 24), (16, 16)] {
            let (g, _) = build_strassen(n).unwrap();
            let s = generate_blocked_schedule(n, m).unwrap();
            let st = validate_schedule(&g, &s, m, Mode::NoRecompute).unwrap();
            assert_eq!(st.recomputed_vertices, 0);
        }
    }

    #[test]
    fn larger_cache_never_costs_more() {
        for n in [2, 4, 8] {
            let mut prev = (usize::MAX, usize::MAX);
            for m in 5..=3 * n * n + 8 {
                let b = generate_blocked_schedule(n, m).unwrap().io_count();
                let v = generate_naive_schedule(n, m).unwrap().io_count();
                assert!(b <= prev.0 && v <= prev.1, "n={n} M={m}");
                prev = (b, v);
            }
        }
    }

    #[test]
    fn naive_schedules() {
        let s = generate_naive_schedule(1, 4).unwrap();
        let g = build_naive(1).unwrap();
        assert_eq!(validate_schedule(&g, &s, 4, Mode::NoRecompute).unwrap().io_total, 3);
        let g = build_naive(4).unwrap();
        let s = generate_naive_schedule(4, 8).unwrap();
        validate_schedule(&g, &s, 8, Mode::NoRecompute).unwrap();
        assert!(generate_naive_schedule(4, 3).is_err());
        assert_eq!(naive_tile(16), 2);
        assert_eq!(naive_tile(4), 1);
    }
}
