//! CDAG builders for Strassen's algorithm, definition-based multiplication
//! and arbitrary `(n0, m0)`-Strassen-like schemes.
//!
//! The recursive builders share one engine: a node of the recursion encodes
//! its operands into `m0` pairs of sub-operands, recurses on each pair and
//! decodes the `m0` sub-products into its output. Every vertex created while
//! building a node (including its descendants) lies in one contiguous index
//! range, which is what the sub-CDAG families are built from.

mod blocks;
mod naive;
mod scheme;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::cdag::{Cdag, CdagError, DraftCdag, Meta, SubCdagFamily};
use crate::vertex::{Role, VertexId};

pub use blocks::{build_decoder, build_encoder, encoder_supports, Side};
pub use naive::build_naive;
pub use scheme::{Combination, StrassenLikeSpec, CHECK_PRIME, SPEC_SCHEMA, STRASSEN_2_7_JSON};

pub(crate) use scheme::Scheme;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("n must be a power of {base}, got {n}")]
    NotPowerOf { n: usize, base: usize },
    #[error("invalid Strassen-like spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Cdag(#[from] CdagError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Identify single-term, unit-coefficient combinations with their operand
    /// instead of creating a copy vertex.
    pub merge_pass_through: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            merge_pass_through: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub input_count: usize,
    pub output_count: usize,
    /// One family per recursion level, level 0 first.
    pub families: Vec<SubCdagFamily>,
}

/// One sub-problem of the recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionNode {
    pub path: Vec<u16>,
    pub dim: usize,
    /// Operand vertices, row-major `dim x dim`.
    pub a_inputs: Vec<u32>,
    pub b_inputs: Vec<u32>,
    /// Result vertices, row-major.
    pub outputs: Vec<u32>,
    /// Vertex range created by this node and its descendants.
    pub created: (u32, u32),
    /// End of this node's own encoder vertices (start is `created.0`).
    pub enc_end: u32,
    /// Start of this node's own decoder vertices (end is `created.1`).
    pub dec_start: u32,
    pub children: Vec<usize>,
}

impl RecursionNode {
    pub fn depth(&self) -> usize {
        self.path.len()
    }

    /// Operands, created vertices and outputs of this sub-problem, sorted.
    pub fn member_vertices(&self) -> Vec<u32> {
        let mut m: Vec<u32> = self
            .a_inputs
            .iter()
            .chain(&self.b_inputs)
            .copied()
            .chain(self.created.0..self.created.1)
            .collect();
        m.sort_unstable();
        m.dedup();
        m
    }
}

/// Recursion tree in pre-order; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionTree {
    pub n0: usize,
    pub m0: usize,
    pub nodes: Vec<RecursionNode>,
}

impl RecursionTree {
    pub fn root(&self) -> &RecursionNode {
        &self.nodes[0]
    }

    pub fn at_depth(&self, depth: usize) -> impl Iterator<Item = &RecursionNode> + '_ {
        self.nodes.iter().filter(move |nd| nd.depth() == depth)
    }

    pub fn levels(&self) -> usize {
        self.nodes.iter().map(RecursionNode::depth).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct RecursiveBuild {
    pub cdag: Cdag,
    pub report: BuildReport,
    pub tree: RecursionTree,
}

/// Exponent `L` with `base^L = n`, if any.
pub fn exact_log(n: usize, base: usize) -> Option<u32> {
    if n == 0 || base < 2 {
        return None;
    }
    let (mut x, mut l) = (n, 0);
    while x % base == 0 {
        x /= base;
        l += 1;
    }
    (x == 1).then_some(l)
}

struct Engine<'s> {
    scheme: &'s Scheme,
    opts: BuildOptions,
    draft: DraftCdag,
    nodes: Vec<RecursionNode>,
}

impl Engine<'_> {
    /// Vertex computing `comb` over the blocks `blocks[..]` at entry `(r, c)`.
    fn combine(
        &mut self,
        comb: &Combination,
        blocks: &[Vec<u32>],
        entry: usize,
        id: impl FnOnce() -> VertexId,
    ) -> u32 {
        if self.opts.merge_pass_through {
            if let Some(b) = comb.pass_through() {
                return blocks[b][entry];
            }
        }
        let v = self.draft.add_vertex(id());
        for &(b, w) in &comb.terms {
            self.draft.add_weighted_edge(blocks[b][entry], v, w);
        }
        v
    }

    fn node(&mut self, path: Vec<u16>, dim: usize, a: Vec<u32>, b: Vec<u32>) -> usize {
        let me = self.nodes.len();
        let start = self.draft.vertex_count() as u32;
        self.nodes.push(RecursionNode {
            path: path.clone(),
            dim,
            a_inputs: a.clone(),
            b_inputs: b.clone(),
            outputs: vec![],
            created: (start, start),
            enc_end: start,
            dec_start: start,
            children: vec![],
        });

        if dim == 1 {
            let v = self.draft.add_vertex(VertexId::new(&path, Role::Product, &[]));
            self.draft.add_edge(a[0], v);
            self.draft.add_edge(b[0], v);
            let nd = &mut self.nodes[me];
            nd.outputs = vec![v];
            nd.created = (start, v + 1);
            nd.enc_end = start;
            nd.dec_start = start;
            return me;
        }

        let scheme = self.scheme;
        let n0 = scheme.n0;
        let h = dim / n0;
        let split = |m: &[u32]| -> Vec<Vec<u32>> {
            (0..n0 * n0)
                .map(|blk| {
                    let (br, bc) = (blk / n0, blk % n0);
                    (0..h * h)
                        .map(|e| m[(br * h + e / h) * dim + bc * h + e % h])
                        .collect()
                })
                .collect()
        };
        let (ablk, bblk) = (split(&a), split(&b));

        let mut operands = Vec::with_capacity(self.scheme.m0);
        for k in 0..self.scheme.m0 {
            let mut sides = [Vec::with_capacity(h * h), Vec::with_capacity(h * h)];
            for (side, (rows, blks, role)) in [
                (&scheme.enc_a, &ablk, Role::EncA),
                (&scheme.enc_b, &bblk, Role::EncB),
            ]
            .into_iter()
            .enumerate()
            {
                for e in 0..h * h {
                    let idx = [k as u32 + 1, (e / h) as u32, (e % h) as u32];
                    let p = &path;
                    let v = self.combine(&rows[k], blks, e, || VertexId::new(p, role, &idx));
                    sides[side].push(v);
                }
            }
            operands.push(sides);
        }
        let enc_end = self.draft.vertex_count() as u32;

        let mut children = Vec::with_capacity(self.scheme.m0);
        let mut products = Vec::with_capacity(self.scheme.m0);
        for (k, [sa, sb]) in operands.into_iter().enumerate() {
            let mut child_path = path.clone();
            child_path.push(k as u16 + 1);
            let c = self.node(child_path, h, sa, sb);
            products.push(self.nodes[c].outputs.clone());
            children.push(c);
        }

        let dec_start = self.draft.vertex_count() as u32;
        let mut out = vec![0u32; dim * dim];
        for blk in 0..n0 * n0 {
            let (br, bc) = (blk / n0, blk % n0);
            for e in 0..h * h {
                let (r, c) = (br * h + e / h, bc * h + e % h);
                let idx = [r as u32, c as u32];
                let p = &path;
                let comb = &scheme.dec[blk];
                out[r * dim + c] =
                    self.combine(comb, &products, e, || VertexId::new(p, Role::DecOut, &idx));
            }
        }
        let end = self.draft.vertex_count() as u32;
        let nd = &mut self.nodes[me];
        nd.outputs = out;
        nd.created = (start, end);
        nd.enc_end = enc_end;
        nd.dec_start = dec_start;
        nd.children = children;
        me
    }
}

fn build_recursive(
    scheme: &Scheme,
    n: usize,
    opts: BuildOptions,
    meta: Meta,
) -> Result<(Cdag, RecursionTree), BuildError> {
    exact_log(n, scheme.n0).ok_or(BuildError::NotPowerOf { n, base: scheme.n0 })?;
    let mut draft = DraftCdag::new(meta);
    let mut grid = |role| -> Vec<u32> {
        (0..n * n)
            .map(|e| draft.add_vertex(VertexId::new(&[], role, &[(e / n) as u32, (e % n) as u32])))
            .collect()
    };
    let a = grid(Role::InputA);
    let b = grid(Role::InputB);
    for &v in a.iter().chain(&b) {
        draft.declare_input(v);
    }
    let mut eng = Engine {
        scheme,
        opts,
        draft,
        nodes: vec![],
    };
    eng.node(vec![], n, a, b);
    let Engine {
        mut draft, nodes, ..
    } = eng;
    for &v in &nodes[0].outputs {
        draft.declare_output(v);
    }
    let tree = RecursionTree {
        n0: scheme.n0,
        m0: scheme.m0,
        nodes,
    };
    Ok((draft.seal()?, tree))
}

fn report(g: &Cdag, families: Vec<SubCdagFamily>) -> BuildReport {
    BuildReport {
        vertex_count: g.vertex_count(),
        edge_count: g.edge_count(),
        input_count: g.inputs().len(),
        output_count: g.outputs().len(),
        families,
    }
}

fn strassen_families(tree: &RecursionTree, n: usize) -> Vec<SubCdagFamily> {
    (0..=tree.levels())
        .map(|level| SubCdagFamily {
            level,
            block_dim: n / tree.n0.pow(level as u32),
            claimed_count: tree.m0.pow(level as u32),
            members: tree.at_depth(level).map(RecursionNode::member_vertices).collect(),
        })
        .collect()
}

/// Sub-problems reached from `from` by the descent: first child with a
/// non-trivial `A` operand, then its first child with a non-trivial `B`
/// operand.
fn descend(tree: &RecursionTree, scheme: &Scheme, from: usize) -> usize {
    let pick = |node: usize, rows: &[Combination]| {
        let k = rows
            .iter()
            .position(Combination::is_nontrivial)
            .expect("validated spec has a non-trivial row");
        tree.nodes[node].children[k]
    };
    let p2 = pick(from, &scheme.enc_a);
    pick(p2, &scheme.enc_b)
}

fn like_families(tree: &RecursionTree, scheme: &Scheme, n: usize) -> Vec<SubCdagFamily> {
    (0..=tree.levels())
        .map(|level| {
            let block_dim = n / scheme.n0.pow(level as u32);
            let (claimed_count, picked): (usize, Vec<usize>) = if level < 2 {
                let first = (0..tree.nodes.len())
                    .find(|&i| tree.nodes[i].depth() == level)
                    .expect("level exists");
                (1, vec![first])
            } else {
                let roots = (0..tree.nodes.len()).filter(|&i| tree.nodes[i].depth() == level - 2);
                (
                    scheme.m0.pow(level as u32 - 2),
                    roots.map(|r| descend(tree, scheme, r)).collect(),
                )
            };
            SubCdagFamily {
                level,
                block_dim,
                claimed_count,
                members: picked.iter().map(|&i| tree.nodes[i].member_vertices()).collect(),
            }
        })
        .collect()
}

/// `H^{n x n}`, the CDAG of Strassen's algorithm.
pub fn build_strassen(n: usize) -> Result<(Cdag, BuildReport), BuildError> {
    build_strassen_full(n, BuildOptions::default()).map(|b| (b.cdag, b.report))
}

pub fn build_strassen_full(n: usize, opts: BuildOptions) -> Result<RecursiveBuild, BuildError> {
    let scheme = blocks::strassen_scheme();
    let meta = Meta::new("strassen", json!({ "n": n }));
    let (cdag, tree) = build_recursive(&scheme, n, opts, meta)?;
    let report = report(&cdag, strassen_families(&tree, n));
    Ok(RecursiveBuild { cdag, report, tree })
}

/// CDAG of the Strassen-like algorithm described by `spec`.
pub fn build_strassen_like(
    spec: &StrassenLikeSpec,
    n: usize,
) -> Result<(Cdag, BuildReport), BuildError> {
    build_strassen_like_full(spec, n, BuildOptions::default()).map(|b| (b.cdag, b.report))
}

pub fn build_strassen_like_full(
    spec: &StrassenLikeSpec,
    n: usize,
    opts: BuildOptions,
) -> Result<RecursiveBuild, BuildError> {
    spec.validate()?;
    let scheme = spec.scheme();
    let meta = Meta::new(
        "like",
        json!({ "n": n, "spec": serde_json::to_value(spec).expect("spec serializes") }),
    );
    let (cdag, tree) = build_recursive(&scheme, n, opts, meta)?;
    let report = report(&cdag, like_families(&tree, &scheme, n));
    Ok(RecursiveBuild { cdag, report, tree })
}

fn meta_n(meta: &Meta) -> Result<usize, BuildError> {
    meta.params
        .get("n")
        .and_then(|v| v.as_u64())
        .map(|n| n as usize)
        .ok_or_else(|| {
            BuildError::InvalidSpec(format!("metadata of `{}` lacks parameter n", meta.builder))
        })
}

fn meta_spec(meta: &Meta) -> Result<StrassenLikeSpec, BuildError> {
    serde_json::from_value(meta.params["spec"].clone())
        .map_err(|e| BuildError::InvalidSpec(e.to_string()))
}

/// Rebuilds a graph from the builder metadata it was serialized with.
pub fn rebuild_from_meta(meta: &Meta) -> Result<Cdag, BuildError> {
    let n = meta_n(meta)?;
    match meta.builder.as_str() {
        "naive" => build_naive(n),
        _ => rebuild_recursive(meta, n).map(|b| b.cdag),
    }
}

/// Recursive build with the same algorithm as `meta` but dimension `n`.
pub fn rebuild_recursive(meta: &Meta, n: usize) -> Result<RecursiveBuild, BuildError> {
    match meta.builder.as_str() {
        "strassen" => build_strassen_full(n, BuildOptions::default()),
        "like" => build_strassen_like_full(&meta_spec(meta)?, n, BuildOptions::default()),
        other => Err(BuildError::InvalidSpec(format!(
            "`{other}` graphs have no recursive structure"
        ))),
    }
}

/// Dimension recorded in a graph's metadata.
pub fn dimension_of(meta: &Meta) -> Result<usize, BuildError> {
    meta_n(meta)
}

/// Random `A`, `B` over `Z_p` in the graph's input order, and the product
/// computed directly, row-major.
pub fn random_product_instance<R: rand::Rng>(n: usize, p: u64, rng: &mut R) -> (Vec<u64>, Vec<u64>) {
    let a: Vec<u64> = (0..n * n).map(|_| rng.gen_range(0..p)).collect();
    let b: Vec<u64> = (0..n * n).map(|_| rng.gen_range(0..p)).collect();
    let mut c = vec![0u64; n * n];
    for i in 0..n {
        for j in 0..n {
            c[i * n + j] = (0..n).fold(0u128, |acc, k| {
                (acc + a[i * n + k] as u128 * b[k * n + j] as u128) % p as u128
            }) as u64;
        }
    }
    let mut inputs = a;
    inputs.extend(b);
    (inputs, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdag::is_isomorphic;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn h1_is_a_single_product() {
        let (g, r) = build_strassen(1).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 2));
        assert_eq!((r.input_count, r.output_count), (2, 1));
        assert_eq!(g.id(g.outputs()[0]).to_string(), "r/product");
    }

    #[test]
    fn h2_counts() {
        let (g, r) = build_strassen(2).unwrap();
        assert_eq!(g.vertex_count(), 29);
        assert_eq!(g.edge_count(), 46);
        assert_eq!((r.input_count, r.output_count), (8, 4));
        let products = (0..29).filter(|&v| g.role(v) == Role::Product).count();
        assert_eq!(products, 7);
    }

    #[test]
    fn h2_edge_recount_from_blocks() {
        // Encoder edges + 2 per product + decoder edges.
        let ea = build_encoder(Side::A).edge_count();
        let eb = build_encoder(Side::B).edge_count();
        let ed = build_decoder().edge_count();
        assert_eq!(ea + eb + 2 * 7 + ed, 46);
    }

    #[test]
    fn unmerged_pass_throughs_add_copy_vertices() {
        let b = build_strassen_full(2, BuildOptions { merge_pass_through: false }).unwrap();
        assert_eq!(b.cdag.vertex_count(), 33);
        assert_eq!(b.cdag.edge_count(), 50);
    }

    #[test]
    fn rejects_non_powers() {
        assert_eq!(
            build_strassen(6).unwrap_err(),
            BuildError::NotPowerOf { n: 6, base: 2 }
        );
        assert!(build_strassen(0).is_err());
    }

    #[test]
    fn evaluates_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2, 4, 8] {
            let (g, _) = build_strassen(n).unwrap();
            let (x, c) = random_product_instance(n, CHECK_PRIME, &mut rng);
            assert_eq!(g.evaluate_mod(&x, CHECK_PRIME), c, "n = {n}");
        }
    }

    #[test]
    fn level_one_family_of_h4() {
        let (g, r) = build_strassen(4).unwrap();
        let fam = &r.families[1];
        assert_eq!(fam.members.len(), 7);
        assert!(fam.is_disjoint());
        let (h2, _) = build_strassen(2).unwrap();
        for m in &fam.members {
            assert!(is_isomorphic(&g.induced(m).unwrap(), &h2));
        }
    }

    #[test]
    fn like_with_strassen_coefficients_equals_strassen() {
        let spec = StrassenLikeSpec::strassen();
        for n in [1, 2, 4] {
            let (a, _) = build_strassen(n).unwrap();
            let (b, rb) = build_strassen_like(&spec, n).unwrap();
            assert_eq!(a, b);
            assert!(rb.families.iter().all(|f| !f.members.is_empty() && f.is_disjoint()));
        }
    }

    #[test]
    fn like_level_two_descent() {
        let spec = StrassenLikeSpec::strassen();
        let (g, r) = build_strassen_like(&spec, 8).unwrap();
        let fam = &r.families[2];
        assert_eq!(fam.claimed_count, 1);
        assert_eq!(fam.members.len(), 1);
        let (h2, _) = build_strassen(2).unwrap();
        assert!(is_isomorphic(&g.induced(&fam.members[0]).unwrap(), &h2));
        let fam3 = &r.families[3];
        assert_eq!(fam3.members.len(), 7);
        assert!(fam3.is_disjoint());
    }

    #[test]
    fn rebuild_roundtrip() {
        let (g, _) = build_strassen(4).unwrap();
        assert_eq!(rebuild_from_meta(g.meta()).unwrap(), g);
        let n = build_naive(3).unwrap();
        assert_eq!(rebuild_from_meta(n.meta()).unwrap(), n);
    }

    #[test]
    fn exact_log_cases() {
        assert_eq!(exact_log(1, 2), Some(0));
        assert_eq!(exact_log(64, 2), Some(6));
        assert_eq!(exact_log(27, 3), Some(3));
        assert_eq!(exact_log(12, 2), None);
    }
}
