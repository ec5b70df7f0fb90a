//! Immutable computational DAGs.
//!
//! Graphs are assembled in a [`DraftCdag`] and frozen with [`DraftCdag::seal`],
//! which validates the structure and caches a topological order. Vertices are
//! addressed internally by dense `u32` indices; [`VertexId`]s are kept for
//! naming, serialization and lookup.

mod dot;
mod iso;
mod json;

use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::cmp::Reverse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vertex::{Role, VertexId};

pub use dot::to_dot;
pub use iso::is_isomorphic;
pub use json::{from_json, to_json, to_json_value, SCHEMA as CDAG_SCHEMA};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CdagError {
    #[error("cycle detected through vertex {0}")]
    Cycle(String),
    #[error("input vertex {0} has nonzero in-degree")]
    InputHasPredecessor(String),
    #[error("non-input vertex {0} has no predecessors")]
    UndeclaredSource(String),
    #[error("edge endpoint {0} does not name a vertex")]
    DanglingEdge(String),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("vertex {0} declared more than once as {1}")]
    DuplicateDeclaration(String, &'static str),
    #[error("vertex {0} is not part of the graph")]
    UnknownVertex(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error(transparent)]
    VertexId(#[from] crate::vertex::VertexIdError),
}

/// Builder name and parameters a graph was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub builder: String,
    pub params: serde_json::Value,
}

impl Meta {
    pub fn new(builder: impl Into<String>, params: serde_json::Value) -> Self {
        Meta {
            builder: builder.into(),
            params,
        }
    }
}

impl Default for Meta {
    fn default() -> Self {
        Meta::new("manual", serde_json::json!({}))
    }
}

/// A mutable, single-owner graph under construction.
#[derive(Debug, Clone, Default)]
pub struct DraftCdag {
    ids: Vec<VertexId>,
    edges: Vec<(u32, u32, i64)>,
    inputs: Vec<u32>,
    outputs: Vec<u32>,
    meta: Meta,
}

impl DraftCdag {
    pub fn new(meta: Meta) -> Self {
        DraftCdag {
            meta,
            ..Default::default()
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn add_vertex(&mut self, id: VertexId) -> u32 {
        self.ids.push(id);
        (self.ids.len() - 1) as u32
    }

    pub fn add_edge(&mut self, from: u32, to: u32) {
        self.edges.push((from, to, 1));
    }

    /// Edge whose source enters `to` with coefficient `weight` when `to` is a
    /// linear combination.
    pub fn add_weighted_edge(&mut self, from: u32, to: u32, weight: i64) {
        self.edges.push((from, to, weight));
    }

    pub fn declare_input(&mut self, v: u32) {
        self.inputs.push(v);
    }

    pub fn declare_output(&mut self, v: u32) {
        self.outputs.push(v);
    }

    pub fn id(&self, v: u32) -> &VertexId {
        &self.ids[v as usize]
    }

    pub fn seal(self) -> Result<Cdag, CdagError> {
        let DraftCdag {
            ids,
            mut edges,
            inputs,
            outputs,
            meta,
        } = self;
        let n = ids.len();
        let name = |v: u32| -> String {
            ids.get(v as usize)
                .map(|id| id.to_string())
                .unwrap_or_else(|| format!("#{v}"))
        };

        for &(u, v, _) in &edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(CdagError::DanglingEdge(format!("#{x}")));
                }
            }
        }
        for &x in inputs.iter().chain(outputs.iter()) {
            if x as usize >= n {
                return Err(CdagError::DanglingEdge(format!("#{x}")));
            }
        }

        let mut sorted: Vec<u32> = (0..n as u32).collect();
        sorted.sort_by(|&a, &b| ids[a as usize].cmp(&ids[b as usize]));
        for w in sorted.windows(2) {
            if ids[w[0] as usize] == ids[w[1] as usize] {
                return Err(CdagError::DuplicateVertex(name(w[0])));
            }
        }

        // Stable sort keeps each vertex's predecessors in insertion order.
        edges.sort_by_key(|&(_, v, _)| v);
        let mut pred_off = vec![0u32; n + 1];
        for &(_, v, _) in &edges {
            pred_off[v as usize + 1] += 1;
        }
        for i in 0..n {
            pred_off[i + 1] += pred_off[i];
        }
        let preds: Vec<u32> = edges.iter().map(|&(u, _, _)| u).collect();
        let weights: Vec<i64> = edges.iter().map(|&(_, _, w)| w).collect();
        for v in 0..n {
            let ps = &preds[pred_off[v] as usize..pred_off[v + 1] as usize];
            let mut seen = HashSet::with_capacity(ps.len());
            for &u in ps {
                if !seen.insert(u) {
                    return Err(CdagError::DuplicateEdge(name(u), name(v as u32)));
                }
            }
        }

        let mut is_input = vec![false; n];
        for &v in &inputs {
            if std::mem::replace(&mut is_input[v as usize], true) {
                return Err(CdagError::DuplicateDeclaration(name(v), "input"));
            }
        }
        let mut is_output = vec![false; n];
        for &v in &outputs {
            if std::mem::replace(&mut is_output[v as usize], true) {
                return Err(CdagError::DuplicateDeclaration(name(v), "output"));
            }
        }
        for v in 0..n {
            let indeg = pred_off[v + 1] - pred_off[v];
            if is_input[v] && indeg > 0 {
                return Err(CdagError::InputHasPredecessor(name(v as u32)));
            }
            if !is_input[v] && indeg == 0 {
                return Err(CdagError::UndeclaredSource(name(v as u32)));
            }
        }

        let mut succ_count = vec![0u32; n + 1];
        for &u in &preds {
            succ_count[u as usize + 1] += 1;
        }
        for i in 0..n {
            succ_count[i + 1] += succ_count[i];
        }
        let succ_off = succ_count.clone();
        let mut fill = succ_count;
        let mut succs = vec![0u32; preds.len()];
        for v in 0..n {
            for &u in &preds[pred_off[v] as usize..pred_off[v + 1] as usize] {
                succs[fill[u as usize] as usize] = v as u32;
                fill[u as usize] += 1;
            }
        }

        // Kahn's algorithm, smallest index first, for a reproducible order.
        let mut indeg: Vec<u32> = (0..n).map(|v| pred_off[v + 1] - pred_off[v]).collect();
        let mut heap: BinaryHeap<Reverse<u32>> = (0..n as u32)
            .filter(|&v| indeg[v as usize] == 0)
            .map(Reverse)
            .collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(Reverse(u)) = heap.pop() {
            topo.push(u);
            for &v in &succs[succ_off[u as usize] as usize..succ_off[u as usize + 1] as usize] {
                indeg[v as usize] -= 1;
                if indeg[v as usize] == 0 {
                    heap.push(Reverse(v));
                }
            }
        }
        if topo.len() != n {
            let stuck = (0..n).find(|&v| indeg[v] > 0).unwrap_or(0);
            return Err(CdagError::Cycle(name(stuck as u32)));
        }
        let mut topo_pos = vec![0u32; n];
        for (i, &v) in topo.iter().enumerate() {
            topo_pos[v as usize] = i as u32;
        }
        for u in 0..n {
            succs[succ_off[u] as usize..succ_off[u + 1] as usize]
                .sort_by_key(|&v| topo_pos[v as usize]);
        }

        Ok(Cdag {
            ids,
            pred_off,
            preds,
            weights,
            succ_off,
            succs,
            inputs,
            outputs,
            is_input,
            is_output,
            topo,
            topo_pos,
            sorted,
            meta,
        })
    }
}

/// A sealed, validated computational DAG.
#[derive(Debug, Clone)]
pub struct Cdag {
    ids: Vec<VertexId>,
    pred_off: Vec<u32>,
    preds: Vec<u32>,
    weights: Vec<i64>,
    succ_off: Vec<u32>,
    succs: Vec<u32>,
    inputs: Vec<u32>,
    outputs: Vec<u32>,
    is_input: Vec<bool>,
    is_output: Vec<bool>,
    topo: Vec<u32>,
    topo_pos: Vec<u32>,
    sorted: Vec<u32>,
    meta: Meta,
}

impl Cdag {
    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.preds.len()
    }

    pub fn id(&self, v: u32) -> &VertexId {
        &self.ids[v as usize]
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn role(&self, v: u32) -> Role {
        self.ids[v as usize].role
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn preds(&self, v: u32) -> &[u32] {
        &self.preds[self.pred_off[v as usize] as usize..self.pred_off[v as usize + 1] as usize]
    }

    /// Coefficients of the in-edges of `v`, aligned with [`Cdag::preds`].
    pub fn pred_weights(&self, v: u32) -> &[i64] {
        &self.weights[self.pred_off[v as usize] as usize..self.pred_off[v as usize + 1] as usize]
    }

    /// Successors of `v`, sorted by topological position.
    pub fn succs(&self, v: u32) -> &[u32] {
        &self.succs[self.succ_off[v as usize] as usize..self.succ_off[v as usize + 1] as usize]
    }

    pub fn in_degree(&self, v: u32) -> usize {
        self.preds(v).len()
    }

    pub fn out_degree(&self, v: u32) -> usize {
        self.succs(v).len()
    }

    pub fn max_in_degree(&self) -> usize {
        (0..self.vertex_count() as u32)
            .map(|v| self.in_degree(v))
            .max()
            .unwrap_or(0)
    }

    pub fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }

    pub fn is_input(&self, v: u32) -> bool {
        self.is_input[v as usize]
    }

    pub fn is_output(&self, v: u32) -> bool {
        self.is_output[v as usize]
    }

    pub fn topo_order(&self) -> &[u32] {
        &self.topo
    }

    pub fn topo_pos(&self, v: u32) -> u32 {
        self.topo_pos[v as usize]
    }

    /// All edges as `(from, to)` pairs, grouped by target.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.vertex_count() as u32).flat_map(move |v| self.preds(v).iter().map(move |&u| (u, v)))
    }

    pub fn lookup(&self, id: &VertexId) -> Option<u32> {
        self.sorted
            .binary_search_by(|&v| self.ids[v as usize].cmp(id))
            .ok()
            .map(|k| self.sorted[k])
    }

    pub fn lookup_str(&self, s: &str) -> Result<u32, CdagError> {
        let id: VertexId = s.parse()?;
        self.lookup(&id)
            .ok_or_else(|| CdagError::UnknownVertex(s.to_string()))
    }

    /// Vertices from which some vertex of `targets` is reachable without
    /// passing through a `blocked` vertex. Blocked vertices are never marked.
    pub fn reaches(&self, targets: &[u32], blocked: &[bool]) -> Vec<bool> {
        let mut mark = vec![false; self.vertex_count()];
        let mut stack = Vec::new();
        for &t in targets {
            if !blocked.get(t as usize).copied().unwrap_or(false) && !mark[t as usize] {
                mark[t as usize] = true;
                stack.push(t);
            }
        }
        while let Some(v) = stack.pop() {
            for &u in self.preds(v) {
                if !mark[u as usize] && !blocked.get(u as usize).copied().unwrap_or(false) {
                    mark[u as usize] = true;
                    stack.push(u);
                }
            }
        }
        mark
    }

    /// Vertices reachable from `sources` without passing through a `blocked`
    /// vertex.
    pub fn reachable_from(&self, sources: &[u32], blocked: &[bool]) -> Vec<bool> {
        let mut mark = vec![false; self.vertex_count()];
        let mut stack = Vec::new();
        for &s in sources {
            if !blocked.get(s as usize).copied().unwrap_or(false) && !mark[s as usize] {
                mark[s as usize] = true;
                stack.push(s);
            }
        }
        while let Some(u) = stack.pop() {
            for &v in self.succs(u) {
                if !mark[v as usize] && !blocked.get(v as usize).copied().unwrap_or(false) {
                    mark[v as usize] = true;
                    stack.push(v);
                }
            }
        }
        mark
    }

    /// Induced subgraph on `members`. Its inputs are the members without an
    /// in-edge from another member; its outputs are the members without an
    /// out-edge to another member together with outputs of `self`.
    pub fn induced(&self, members: &[u32]) -> Result<Cdag, CdagError> {
        let n = self.vertex_count();
        let mut local = vec![u32::MAX; n];
        let mut order: Vec<u32> = members.to_vec();
        order.sort_unstable();
        order.dedup();
        for &v in &order {
            if v as usize >= n {
                return Err(CdagError::UnknownVertex(format!("#{v}")));
            }
        }
        let mut draft = DraftCdag::new(Meta::new(
            "induced",
            serde_json::json!({ "parent": self.meta.builder, "members": order.len() }),
        ));
        for &v in &order {
            local[v as usize] = draft.add_vertex(self.ids[v as usize].clone());
        }
        let mut has_in = vec![false; order.len()];
        let mut has_out = vec![false; order.len()];
        for &v in &order {
            let lv = local[v as usize];
            for (&u, &w) in self.preds(v).iter().zip(self.pred_weights(v)) {
                let lu = local[u as usize];
                if lu != u32::MAX {
                    draft.add_weighted_edge(lu, lv, w);
                    has_in[lv as usize] = true;
                    has_out[lu as usize] = true;
                }
            }
        }
        let mut by_id: Vec<u32> = (0..order.len() as u32).collect();
        by_id.sort_by(|&a, &b| draft.id(a).cmp(draft.id(b)));
        for &l in &by_id {
            if !has_in[l as usize] {
                draft.declare_input(l);
            }
        }
        for &l in &by_id {
            if !has_out[l as usize] || self.is_output[order[l as usize] as usize] {
                draft.declare_output(l);
            }
        }
        draft.seal()
    }

    /// [`Cdag::induced`] addressed by vertex ids.
    pub fn induced_by_ids<'a, I>(&self, members: I) -> Result<Cdag, CdagError>
    where
        I: IntoIterator<Item = &'a VertexId>,
    {
        let idx = members
            .into_iter()
            .map(|id| {
                self.lookup(id)
                    .ok_or_else(|| CdagError::UnknownVertex(id.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.induced(&idx)
    }

    /// Vertex-disjoint union; the vertices of part `k` get `k + 1` prepended to
    /// their recursion path.
    pub fn disjoint_union(parts: &[&Cdag], meta: Meta) -> Result<Cdag, CdagError> {
        let mut draft = DraftCdag::new(meta);
        let mut offsets = Vec::with_capacity(parts.len());
        for (k, g) in parts.iter().enumerate() {
            let base = draft.vertex_count() as u32;
            offsets.push(base);
            for id in &g.ids {
                draft.add_vertex(id.with_prefix(k as u16 + 1));
            }
            for v in 0..g.vertex_count() as u32 {
                for (&u, &w) in g.preds(v).iter().zip(g.pred_weights(v)) {
                    draft.add_weighted_edge(base + u, base + v, w);
                }
            }
        }
        for (g, &base) in parts.iter().zip(&offsets) {
            for &v in &g.inputs {
                draft.declare_input(base + v);
            }
        }
        for (g, &base) in parts.iter().zip(&offsets) {
            for &v in &g.outputs {
                draft.declare_output(base + v);
            }
        }
        draft.seal()
    }

    /// Evaluates the graph over the integers modulo `p`. Product vertices
    /// multiply their operands; every other non-input vertex is the weighted
    /// sum of its operands. `values` are given in input order; returned values
    /// are in output order.
    pub fn evaluate_mod(&self, values: &[u64], p: u64) -> Vec<u64> {
        assert_eq!(values.len(), self.inputs.len(), "one value per input");
        let mut val = vec![0u64; self.vertex_count()];
        for (&v, &x) in self.inputs.iter().zip(values) {
            val[v as usize] = x % p;
        }
        let p128 = p as u128;
        for &v in &self.topo {
            if self.is_input[v as usize] {
                continue;
            }
            let x = match self.role(v) {
                Role::Product => self.preds(v).iter().fold(1u128, |acc, &u| {
                    acc * val[u as usize] as u128 % p128
                }),
                _ => self
                    .preds(v)
                    .iter()
                    .zip(self.pred_weights(v))
                    .fold(0u128, |acc, (&u, &w)| {
                        let c = w.rem_euclid(p as i64) as u128;
                        (acc + c * val[u as usize] as u128) % p128
                    }),
            };
            val[v as usize] = x as u64;
        }
        self.outputs.iter().map(|&v| val[v as usize]).collect()
    }

    fn edge_set(&self) -> BTreeSet<(&VertexId, &VertexId, i64)> {
        (0..self.vertex_count() as u32)
            .flat_map(|v| {
                self.preds(v)
                    .iter()
                    .zip(self.pred_weights(v))
                    .map(move |(&u, &w)| (self.id(u), self.id(v), w))
            })
            .collect()
    }
}

/// Equality on vertex ids, weighted edges and the ordered input/output lists.
/// Builder metadata is ignored.
impl PartialEq for Cdag {
    fn eq(&self, other: &Self) -> bool {
        let names = |g: &Cdag, vs: &[u32]| -> Vec<VertexId> {
            vs.iter().map(|&v| g.id(v).clone()).collect()
        };
        self.vertex_count() == other.vertex_count()
            && self.edge_count() == other.edge_count()
            && names(self, &self.inputs) == names(other, &other.inputs)
            && names(self, &self.outputs) == names(other, &other.outputs)
            && self.sorted.iter().map(|&v| self.id(v)).eq(other.sorted.iter().map(|&v| other.id(v)))
            && self.edge_set() == other.edge_set()
    }
}

/// A family of sub-CDAGs found at one recursion level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCdagFamily {
    pub level: usize,
    /// Matrix dimension handled by each member.
    pub block_dim: usize,
    /// Number of members the relevant counting lemma guarantees.
    pub claimed_count: usize,
    /// Vertex indices of each member, sorted.
    pub members: Vec<Vec<u32>>,
}

impl SubCdagFamily {
    /// First pair of members that share a vertex, if any.
    pub fn find_overlap(&self) -> Option<(usize, usize, u32)> {
        let mut owner: std::collections::HashMap<u32, usize> = Default::default();
        for (k, m) in self.members.iter().enumerate() {
            for &v in m {
                if let Some(&j) = owner.get(&v) {
                    if j != k {
                        return Some((j, k, v));
                    }
                } else {
                    owner.insert(v, k);
                }
            }
        }
        None
    }

    pub fn is_disjoint(&self) -> bool {
        self.find_overlap().is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> VertexId {
        let k: u32 = name.bytes().next().unwrap() as u32;
        VertexId::new(&[], Role::Sum, &[k])
    }

    pub(crate) fn chain() -> Cdag {
        let mut d = DraftCdag::default();
        let a = d.add_vertex(VertexId::new(&[], Role::InputA, &[0]));
        let b = d.add_vertex(v("b"));
        let c = d.add_vertex(v("c"));
        d.add_edge(a, b);
        d.add_edge(b, c);
        d.declare_input(a);
        d.declare_output(c);
        d.seal().unwrap()
    }

    #[test]
    fn chain_seals_with_topo_order() {
        let g = chain();
        assert_eq!(g.topo_order(), &[0, 1, 2]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let mut d = DraftCdag::default();
        let i = d.add_vertex(VertexId::new(&[], Role::InputA, &[0]));
        let a = d.add_vertex(v("a"));
        let b = d.add_vertex(v("b"));
        d.add_edge(i, a);
        d.add_edge(a, b);
        d.add_edge(b, a);
        d.declare_input(i);
        assert!(matches!(d.seal(), Err(CdagError::Cycle(_))));
    }

    #[test]
    fn structural_errors() {
        let mut d = DraftCdag::default();
        let a = d.add_vertex(VertexId::new(&[], Role::InputA, &[0]));
        let b = d.add_vertex(v("b"));
        d.add_edge(b, a);
        d.declare_input(a);
        d.declare_input(b);
        assert!(matches!(d.seal(), Err(CdagError::InputHasPredecessor(_))));

        let mut d = DraftCdag::default();
        let a = d.add_vertex(VertexId::new(&[], Role::InputA, &[0]));
        d.add_edge(a, 7);
        d.declare_input(a);
        assert!(matches!(d.seal(), Err(CdagError::DanglingEdge(_))));

        let mut d = DraftCdag::default();
        d.add_vertex(VertexId::new(&[], Role::InputA, &[0]));
        d.add_vertex(v("x"));
        d.declare_input(0);
        assert!(matches!(d.seal(), Err(CdagError::UndeclaredSource(_))));

        let mut d = DraftCdag::default();
        d.add_vertex(VertexId::new(&[], Role::InputA, &[0]));
        d.add_vertex(VertexId::new(&[], Role::InputA, &[0]));
        d.declare_input(0);
        d.declare_input(1);
        assert!(matches!(d.seal(), Err(CdagError::DuplicateVertex(_))));
    }

    #[test]
    fn induced_on_everything_is_identity() {
        let g = chain();
        let all: Vec<u32> = (0..3).collect();
        assert_eq!(g.induced(&all).unwrap(), g);
    }

    #[test]
    fn induced_single_vertex() {
        let g = chain();
        let h = g.induced(&[1]).unwrap();
        assert_eq!(h.vertex_count(), 1);
        assert_eq!(h.edge_count(), 0);
        assert_eq!(h.inputs().len(), 1);
        assert_eq!(h.outputs().len(), 1);
    }

    #[test]
    fn induced_rejects_unknown_ids() {
        let g = chain();
        let bogus = VertexId::new(&[9], Role::Product, &[]);
        assert!(matches!(
            g.induced_by_ids([&bogus]),
            Err(CdagError::UnknownVertex(_))
        ));
    }

    #[test]
    fn lookup_by_id() {
        let g = chain();
        for u in 0..3 {
            assert_eq!(g.lookup(g.id(u)), Some(u));
        }
        assert_eq!(g.lookup_str("r/sum/98").unwrap(), 1);
    }

    #[test]
    fn overlap_detection() {
        let fam = SubCdagFamily {
            level: 1,
            block_dim: 1,
            claimed_count: 2,
            members: vec![vec![0, 1], vec![2, 1]],
        };
        assert_eq!(fam.find_overlap(), Some((0, 1, 1)));
    }
}
