//! Dominator and disjoint-path checks on Strassen CDAGs.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{LemmaError, LemmaVerdict, SweepOptions, Tally};
use crate::bounds::{corollary_half, disjoint_paths_bound, dominator_2m, z_level};
use crate::builders::{build_strassen_full, BuildOptions, RecursiveBuild};
use crate::cdag::Cdag;
use crate::domflow::{min_dominator_with, CutSolver, DominatorQuery, DomflowError};

fn names(g: &Cdag, vs: &[u32]) -> String {
    let v: Vec<String> = vs.iter().map(|&v| g.id(v).to_string()).collect();
    format!("[{}]", v.join(" "))
}

/// Every nonempty output subset `O'` of `g` has a minimum dominator of at
/// least `ceil(|O'|/2)` vertices. Exhaustive; needs at most 16 outputs.
pub fn verify_corollary_half(g: &Cdag) -> Result<LemmaVerdict, LemmaError> {
    let outs = g.outputs();
    if outs.len() > 16 {
        return Err(LemmaError::TooLarge(format!(
            "{} outputs, at most 16 supported",
            outs.len()
        )));
    }
    let results: Vec<Result<Option<String>, DomflowError>> = (1u32..1 << outs.len())
        .into_par_iter()
        .map_init(
            || CutSolver::new(g),
            |solver, mask| {
                let sub: Vec<u32> = (0..outs.len())
                    .filter(|&k| mask >> k & 1 == 1)
                    .map(|k| outs[k])
                    .collect();
                let need = corollary_half(sub.len());
                let r = min_dominator_with(solver, &DominatorQuery::dominator(g, &sub))?;
                Ok((r.size < need).then(|| {
                    format!("O' = {}: min dominator {} < {need}", names(g, &sub), r.size)
                }))
            },
        )
        .collect();
    let mut t = Tally::new("corollary-half");
    for r in results {
        t.record(r?);
    }
    Ok(t.finish())
}

/// The sub-problems of dimension `2 sqrt(M)` in a Strassen build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZFamily {
    pub level: usize,
    /// Recursion-tree indices of the members.
    pub nodes: Vec<usize>,
    /// All member outputs, member by member.
    pub z: Vec<u32>,
    /// Member vertices that are not member inputs.
    pub internal: Vec<u32>,
    /// Operands of each member.
    pub inputs: Vec<Vec<u32>>,
}

pub fn z_family(build: &RecursiveBuild, m: u64) -> Result<ZFamily, LemmaError> {
    let n = build.tree.root().dim as u64;
    let level = z_level(n, m)? as usize;
    let nodes: Vec<usize> = (0..build.tree.nodes.len())
        .filter(|&i| build.tree.nodes[i].depth() == level)
        .collect();
    let mut z = Vec::new();
    let mut internal = Vec::new();
    let mut inputs = Vec::new();
    for &i in &nodes {
        let nd = &build.tree.nodes[i];
        z.extend(&nd.outputs);
        let ins: Vec<u32> = nd.a_inputs.iter().chain(&nd.b_inputs).copied().collect();
        internal.extend(nd.member_vertices().into_iter().filter(|v| !ins.contains(v)));
        inputs.push(ins);
    }
    Ok(ZFamily {
        level,
        nodes,
        z,
        internal,
        inputs,
    })
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn all_subsets(items: &[u32], k: usize) -> Vec<Vec<u32>> {
    let n = items.len();
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        out.push(pick.iter().map(|&i| items[i]).collect());
        let Some(i) = (0..k).rev().find(|&i| pick[i] < n - k + i) else {
            return out;
        };
        pick[i] += 1;
        for j in i + 1..k {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

fn sample_subset<R: Rng>(rng: &mut R, items: &[u32], k: usize) -> Vec<u32> {
    let mut s: Vec<u32> = sample(rng, items.len(), k).into_iter().map(|i| items[i]).collect();
    s.sort_unstable();
    s
}

/// Every `4M`-subset `Z` of the outputs of the `2 sqrt(M)` sub-problems of
/// `H^{n x n}` has a minimum dominator of at least `2M` vertices. All
/// subsets are checked when there are at most `opts.exhaustive_limit`,
/// otherwise `opts.samples` seeded ones; each member's own outputs are
/// always checked as well.
pub fn verify_dominator_2m(n: u64, m: u64, opts: &SweepOptions) -> Result<LemmaVerdict, LemmaError> {
    let build = build_strassen_full(n as usize, BuildOptions::default())?;
    let zf = z_family(&build, m)?;
    let g = &build.cdag;
    let k = 4 * m as usize;
    let need = dominator_2m(m) as usize;
    let total = binomial(zf.z.len() as u64, k as u64);
    let mut t = Tally::new("dominator-2m");
    let mut subsets = if total <= opts.exhaustive_limit as u128 {
        all_subsets(&zf.z, k)
    } else {
        t = t.seeded(opts.seed);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        (0..opts.samples)
            .map(|_| sample_subset(&mut rng, &zf.z, k))
            .collect()
    };
    subsets.extend(zf.nodes.iter().map(|&i| build.tree.nodes[i].outputs.clone()));

    let results: Vec<Result<Option<String>, DomflowError>> = subsets
        .par_iter()
        .map_init(
            || CutSolver::new(g),
            |solver, z| {
                let r = min_dominator_with(solver, &DominatorQuery::dominator(g, z))?;
                Ok((r.size < need)
                    .then(|| format!("Z = {}: min dominator {} < {need}", names(g, z), r.size)))
            },
        )
        .collect();
    for r in results {
        t.record(r?);
    }
    Ok(t.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisjointPathInstance {
    /// Member operands with a path to `Z` avoiding the cut.
    pub reaching_inputs: usize,
    /// Vertex-disjoint paths from the global inputs to those operands.
    pub paths: usize,
    /// `4 sqrt(M (|Z| - 2|Gamma|))` when the radicand is positive.
    pub bound: Option<f64>,
}

impl DisjointPathInstance {
    pub fn holds(&self) -> bool {
        self.bound.is_none_or(|b| self.paths as f64 >= b - 1e-9)
    }
}

/// Counts vertex-disjoint paths from the global inputs to the member
/// operands that still reach `z` once `gamma` is removed.
pub fn disjoint_path_count(
    solver: &mut CutSolver,
    zf: &ZFamily,
    m: u64,
    z: &[u32],
    gamma: &[u32],
) -> Result<DisjointPathInstance, LemmaError> {
    let g = solver.graph();
    let mut is_internal = vec![false; g.vertex_count()];
    for &v in &zf.internal {
        is_internal[v as usize] = true;
    }
    for &v in gamma {
        if v as usize >= g.vertex_count() || !is_internal[v as usize] {
            return Err(DomflowError::InputInCut(format!("#{v}")).into());
        }
    }
    let mut blocked = vec![false; g.vertex_count()];
    for &v in gamma {
        blocked[v as usize] = true;
    }
    let reach = g.reaches(z, &blocked);
    let mut y: Vec<u32> = zf.inputs.iter().flatten().copied().filter(|&v| reach[v as usize]).collect();
    y.sort_unstable();
    y.dedup();
    let paths = if y.is_empty() {
        0
    } else {
        solver.min_cut(g.inputs(), &y).flow
    };
    Ok(DisjointPathInstance {
        reaching_inputs: y.len(),
        paths,
        bound: disjoint_paths_bound(m, z.len(), gamma.len()),
    })
}

/// Seeded `(Z, Gamma)` samples on `H^{n x n}`: `Z` a nonempty subset of
/// the `2 sqrt(M)` sub-problem outputs, `Gamma` at most `|Z|/2` internal
/// vertices of those sub-problems.
pub fn verify_disjoint_paths(n: u64, m: u64, samples: usize, seed: u64) -> Result<LemmaVerdict, LemmaError> {
    let build = build_strassen_full(n as usize, BuildOptions::default())?;
    let zf = z_family(&build, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(Vec<u32>, Vec<u32>)> = (0..samples)
        .map(|_| {
            let zs = rng.gen_range(1..=zf.z.len());
            let z = sample_subset(&mut rng, &zf.z, zs);
            let gs = rng.gen_range(0..=zs / 2);
            let gamma = sample_subset(&mut rng, &zf.internal, gs);
            (z, gamma)
        })
        .collect();
    let g = &build.cdag;
    let results: Vec<Result<Option<String>, LemmaError>> = cases
        .par_iter()
        .map_init(
            || CutSolver::new(g),
            |solver, (z, gamma)| {
                let r = disjoint_path_count(solver, &zf, m, z, gamma)?;
                Ok((!r.holds()).then(|| {
                    format!(
                        "|Z|={} |Gamma|={}: {} paths < {:.3}",
                        z.len(),
                        gamma.len(),
                        r.paths,
                        r.bound.unwrap_or(0.0)
                    )
                }))
            },
        )
        .collect();
    let mut t = Tally::new("disjoint-paths").seeded(seed);
    for r in results {
        t.record(r?);
    }
    Ok(t.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::build_strassen;
    use crate::cdag::Meta;

    #[test]
    fn corollary_on_h2_and_two_copies() {
        let (g, _) = build_strassen(2).unwrap();
        let v = verify_corollary_half(&g).unwrap();
        assert_eq!((v.instances_checked, v.violation_count), (15, 0));
        let two = Cdag::disjoint_union(&[&g, &g], Meta::new("pair", serde_json::json!({}))).unwrap();
        let v = verify_corollary_half(&two).unwrap();
        assert_eq!((v.instances_checked, v.violation_count), (255, 0));
        let (big, _) = build_strassen(8).unwrap();
        assert!(verify_corollary_half(&big).is_err());
    }

    #[test]
    fn z_family_sizes() {
        let b = build_strassen_full(4, BuildOptions::default()).unwrap();
        let zf = z_family(&b, 1).unwrap();
        assert_eq!((zf.level, zf.nodes.len(), zf.z.len()), (1, 7, 28));
        assert!(z_family(&b, 8).is_err());
    }

    #[test]
    fn dominator_2m_small_sample() {
        let opts = SweepOptions { exhaustive_limit: 10, samples: 300, seed: 3 };
        let v = verify_dominator_2m(4, 1, &opts).unwrap();
        assert!(v.passed(), "{:?}", v.violations);
        assert_eq!(v.instances_checked, 307);
        assert_eq!(v.seed, Some(3));
    }

    #[test]
    fn one_member_paths() {
        let b = build_strassen_full(4, BuildOptions::default()).unwrap();
        let zf = z_family(&b, 1).unwrap();
        let mut solver = CutSolver::new(&b.cdag);
        let z = &zf.z[..4];
        let r = disjoint_path_count(&mut solver, &zf, 1, z, &[]).unwrap();
        assert_eq!(r.bound, Some(8.0));
        assert!(r.paths >= 8, "{r:?}");
        assert!(disjoint_path_count(&mut solver, &zf, 1, z, &[b.cdag.inputs()[0]]).is_err());
        let r = disjoint_path_count(&mut solver, &zf, 1, &z[..1], &[z[0]]).unwrap();
        assert!(r.bound.is_none() && r.holds());
    }

    #[test]
    fn disjoint_paths_sampled() {
        let v = verify_disjoint_paths(4, 1, 100, 9).unwrap();
        assert!(v.passed(), "{:?}", v.violations);
        assert_eq!(verify_disjoint_paths(4, 1, 100, 9).unwrap().violations, v.violations);
    }

    #[test]
    fn helpers() {
        assert_eq!(binomial(28, 4), 20475);
        assert_eq!(all_subsets(&[1, 2, 3, 4, 5], 2).len(), 10);
    }
}
