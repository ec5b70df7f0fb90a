//! Unit vertex-capacity max-flow on a split graph.
//!
//! Vertex `v` becomes `v_in -> v_out` with capacity 1; every CDAG edge
//! `u -> v` becomes `u_out -> v_in` with unbounded capacity. Sources feed
//! their `v_in`, sinks drain their `v_out`, so sources and sinks can be cut
//! like any other vertex. Augmenting paths are found by BFS with neighbours
//! visited in topological order, which makes flows and cuts reproducible.

use std::collections::VecDeque;

use crate::cdag::Cdag;

const NONE: u32 = u32::MAX;

/// Reusable flow network for one graph.
#[derive(Debug, Clone)]
pub struct CutSolver<'g> {
    g: &'g Cdag,
    /// Out-edges per vertex as `(head, edge id)`, heads in topological order.
    out_start: Vec<u32>,
    out: Vec<(u32, u32)>,
    in_start: Vec<u32>,
    inn: Vec<(u32, u32)>,
    split: Vec<bool>,
    edge_flow: Vec<u32>,
}

/// Outcome of one max-flow computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    /// Maximum number of vertex-disjoint source-to-sink paths.
    pub flow: usize,
    /// A minimum vertex cut, the one closest to the sources, in topological order.
    pub vertices: Vec<u32>,
}

struct Search {
    par_in: Vec<(u32, Step)>,
    par_out: Vec<(u32, Step)>,
    seen_in: Vec<bool>,
    seen_out: Vec<bool>,
    hit: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    Start,
    /// Reached `v_out` through the split arc.
    Split,
    /// Reached `v_in` backwards through the split arc.
    SplitBack,
    /// Reached along edge id forwards / backwards.
    Fwd(u32),
    Back(u32),
}

impl<'g> CutSolver<'g> {
    pub fn new(g: &'g Cdag) -> Self {
        let n = g.vertex_count();
        let pos = |v: u32| g.topo_pos(v);
        let mut edges: Vec<(u32, u32)> = g.edges().collect();
        edges.sort_by_key(|&(u, v)| (pos(u), pos(v)));
        let csr = |key: &dyn Fn((u32, u32)) -> (u32, u32)| {
            let mut start = vec![0u32; n + 1];
            for &e in &edges {
                start[key(e).0 as usize + 1] += 1;
            }
            for i in 0..n {
                start[i + 1] += start[i];
            }
            let mut fill = start.clone();
            let mut list = vec![(0u32, 0u32); edges.len()];
            for (id, &e) in edges.iter().enumerate() {
                let (a, b) = key(e);
                list[fill[a as usize] as usize] = (b, id as u32);
                fill[a as usize] += 1;
            }
            for a in 0..n {
                list[start[a] as usize..start[a + 1] as usize].sort_by_key(|&(b, _)| pos(b));
            }
            (start, list)
        };
        let (out_start, out) = csr(&|(u, v)| (u, v));
        let (in_start, inn) = csr(&|(u, v)| (v, u));
        CutSolver {
            g,
            out_start,
            out,
            in_start,
            inn,
            split: vec![false; n],
            edge_flow: vec![0; edges.len()],
        }
    }

    pub fn graph(&self) -> &'g Cdag {
        self.g
    }

    fn outs(&self, v: u32) -> &[(u32, u32)] {
        &self.out[self.out_start[v as usize] as usize..self.out_start[v as usize + 1] as usize]
    }

    fn ins(&self, v: u32) -> &[(u32, u32)] {
        &self.inn[self.in_start[v as usize] as usize..self.in_start[v as usize + 1] as usize]
    }

    fn reset(&mut self) {
        self.split.fill(false);
        self.edge_flow.fill(0);
    }

    /// Residual BFS from all sources, stopping at the first sink `v_out`
    /// when `stop_at_sink` is set.
    fn search(&self, sources: &[u32], is_sink: &[bool], stop_at_sink: bool) -> Search {
        let n = self.g.vertex_count();
        let unseen = (NONE, Step::Start);
        let mut par_in = vec![unseen; n];
        let mut par_out = vec![unseen; n];
        let mut seen_in = vec![false; n];
        let mut seen_out = vec![false; n];
        // (vertex, is_out)
        let mut queue: VecDeque<(u32, bool)> = VecDeque::new();
        for &s in sources {
            if !seen_in[s as usize] {
                seen_in[s as usize] = true;
                queue.push_back((s, false));
            }
        }
        while let Some((v, is_out)) = queue.pop_front() {
            let vi = v as usize;
            if !is_out {
                if !self.split[vi] && !seen_out[vi] {
                    seen_out[vi] = true;
                    par_out[vi] = (v, Step::Split);
                    if is_sink[vi] && stop_at_sink {
                        return Search { par_in, par_out, seen_in, seen_out, hit: Some(v) };
                    }
                    queue.push_back((v, true));
                }
                for &(u, e) in self.ins(v) {
                    if self.edge_flow[e as usize] > 0 && !seen_out[u as usize] {
                        seen_out[u as usize] = true;
                        par_out[u as usize] = (v, Step::Back(e));
                        if is_sink[u as usize] && stop_at_sink {
                            return Search { par_in, par_out, seen_in, seen_out, hit: Some(u) };
                        }
                        queue.push_back((u, true));
                    }
                }
            } else {
                for &(w, e) in self.outs(v) {
                    if !seen_in[w as usize] {
                        seen_in[w as usize] = true;
                        par_in[w as usize] = (v, Step::Fwd(e));
                        queue.push_back((w, false));
                    }
                }
                if self.split[vi] && !seen_in[vi] {
                    seen_in[vi] = true;
                    par_in[vi] = (v, Step::SplitBack);
                    queue.push_back((v, false));
                }
            }
        }
        Search { par_in, par_out, seen_in, seen_out, hit: None }
    }

    /// Max-flow between `sources` and `sinks` and the source-side minimum cut.
    pub fn min_cut(&mut self, sources: &[u32], sinks: &[u32]) -> Cut {
        self.reset();
        let n = self.g.vertex_count();
        let mut srcs: Vec<u32> = sources.to_vec();
        srcs.sort_by_key(|&v| self.g.topo_pos(v));
        srcs.dedup();
        let mut is_sink = vec![false; n];
        for &t in sinks {
            is_sink[t as usize] = true;
        }
        let mut is_source = vec![false; n];
        for &s in &srcs {
            is_source[s as usize] = true;
        }
        let mut flow = 0;
        loop {
            let Search { par_in, par_out, hit, .. } = self.search(&srcs, &is_sink, true);
            let Some(t) = hit else { break };
            // Walk back from t_out to a source's in-node.
            let (mut v, mut is_out) = (t, true);
            loop {
                let (p, step) = if is_out {
                    par_out[v as usize]
                } else {
                    par_in[v as usize]
                };
                if !is_out && p == NONE {
                    debug_assert!(is_source[v as usize]);
                    break;
                }
                match step {
                    Step::Split => {
                        self.split[v as usize] = true;
                        is_out = false;
                    }
                    Step::SplitBack => {
                        self.split[v as usize] = false;
                        is_out = true;
                    }
                    Step::Fwd(e) => {
                        self.edge_flow[e as usize] += 1;
                        v = p;
                        is_out = true;
                    }
                    Step::Back(e) => {
                        self.edge_flow[e as usize] -= 1;
                        v = p;
                        is_out = false;
                    }
                    Step::Start => unreachable!("only source in-nodes lack a parent"),
                }
            }
            flow += 1;
        }
        let reach = self.search(&srcs, &is_sink, false);
        let mut vertices: Vec<u32> = (0..n as u32)
            .filter(|&v| reach.seen_in[v as usize] && !reach.seen_out[v as usize])
            .collect();
        vertices.sort_by_key(|&v| self.g.topo_pos(v));
        debug_assert_eq!(vertices.len(), flow);
        Cut { flow, vertices }
    }
}

/// True when every path from `sources` to `sinks` meets `cut`.
pub fn separates(g: &Cdag, sources: &[u32], sinks: &[u32], cut: &[u32]) -> bool {
    let mut blocked = vec![false; g.vertex_count()];
    for &c in cut {
        blocked[c as usize] = true;
    }
    let reach = g.reachable_from(sources, &blocked);
    !sinks.iter().any(|&t| reach[t as usize])
}
