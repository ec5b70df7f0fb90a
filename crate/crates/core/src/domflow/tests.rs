use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::builders::build_strassen;
use crate::cdag::{DraftCdag, Meta};
use crate::vertex::{Role, VertexId};

fn h2() -> Cdag {
    build_strassen(2).unwrap().0
}

fn input(g: &Cdag, role: Role, r: u32, c: u32) -> u32 {
    g.lookup(&VertexId::new(&[], role, &[r, c])).unwrap()
}

fn out(g: &Cdag, r: u32, c: u32) -> u32 {
    g.lookup(&VertexId::new(&[], Role::DecOut, &[r, c])).unwrap()
}

fn line(len: u32) -> Cdag {
    let mut d = DraftCdag::new(Meta::new("line", serde_json::json!({})));
    let vs: Vec<u32> = (0..len)
        .map(|i| {
            let role = if i == 0 { Role::InputA } else { Role::Sum };
            d.add_vertex(VertexId::new(&[], role, &[i]))
        })
        .collect();
    for w in vs.windows(2) {
        d.add_edge(w[0], w[1]);
    }
    d.declare_input(vs[0]);
    d.declare_output(vs[len as usize - 1]);
    d.seal().unwrap()
}

#[test]
fn target_dominates_itself() {
    let g = h2();
    let c11 = out(&g, 0, 0);
    let r = min_dominator(&DominatorQuery::dominator(&g, &[c11])).unwrap();
    assert_eq!((r.size, r.witness.clone()), (1, vec![c11]));
}

#[test]
fn all_outputs_of_h2() {
    let g = h2();
    let q = DominatorQuery::dominator(&g, g.outputs());
    let r = min_dominator(&q).unwrap();
    assert!(r.size >= 2);
    assert!(is_dominator(&q, &r.witness).unwrap());
    let b = brute_force_min_dominator(&q, 8).unwrap();
    assert_eq!(b.size, r.size);
    assert_eq!(b.method, Method::Brute);
    assert_eq!(max_disjoint_paths(&g, g.inputs(), g.outputs()), r.size);
}

#[test]
fn chain_cut_is_earliest() {
    let g = line(3);
    let r = min_dominator(&DominatorQuery::dominator(&g, &[2])).unwrap();
    assert_eq!((r.size, r.witness), (1, vec![0]));
}

#[test]
fn post_dominators() {
    let g = h2();
    let q = DominatorQuery::post_dominator(&g, g.inputs(), g.outputs());
    let r = min_postdominator(&q).unwrap();
    assert!(r.size <= 7);
    let products: Vec<u32> = (0..g.vertex_count() as u32)
        .filter(|&v| g.role(v) == Role::Product)
        .collect();
    assert_eq!(products.len(), 7);
    assert!(is_dominator(&q, &products).unwrap());

    let e = line(2);
    let r = min_postdominator(&DominatorQuery::post_dominator(&e, &[0], &[1])).unwrap();
    assert_eq!(r.size, 1);

    let a12 = input(&g, Role::InputA, 0, 1);
    let r = min_postdominator(&DominatorQuery::post_dominator(&g, &[a12], &[out(&g, 1, 0)])).unwrap();
    assert_eq!((r.size, r.witness.len()), (0, 0));
}

#[test]
fn query_errors() {
    let g = h2();
    assert_eq!(min_dominator(&DominatorQuery::dominator(&g, &[])), Err(DomflowError::EmptyTargets));
    assert_eq!(
        min_dominator(&DominatorQuery::dominator(&g, &[999])),
        Err(DomflowError::UnknownVertex(999))
    );
    let c = out(&g, 0, 0);
    assert!(matches!(
        min_postdominator(&DominatorQuery::post_dominator(&g, &[c], &[c])),
        Err(DomflowError::SourceIsOutput(_))
    ));
    let a = g.inputs()[0];
    assert!(matches!(
        min_postdominator(&DominatorQuery::post_dominator(&g, &[a], &[a])),
        Err(DomflowError::NotAnOutput(_))
    ));
    assert_eq!(
        brute_force_min_dominator(&DominatorQuery::dominator(&g, &[c]), 0),
        Err(DomflowError::Exhausted { max_size: 0 })
    );
    let (big, _) = build_strassen(4).unwrap();
    assert_eq!(
        brute_force_min_dominator(&DominatorQuery::dominator(&big, &[big.outputs()[0]]), 5),
        Err(DomflowError::OracleTooLarge)
    );
}

// Every post-dominator of an input subset w.r.t. an output subset is at
// least as large as the information flow between them.
#[test]
fn post_dominators_respect_flow_on_h2() {
    let g = h2();
    let mut solver = CutSolver::new(&g);
    let ins = g.inputs().to_vec();
    let outs = g.outputs().to_vec();
    for imask in 1u32..(1 << ins.len()) {
        let i_sub: Vec<u32> = (0..ins.len()).filter(|&k| imask >> k & 1 == 1).map(|k| ins[k]).collect();
        for omask in 1u32..(1 << outs.len()) {
            let o_sub: Vec<u32> = (0..outs.len()).filter(|&k| omask >> k & 1 == 1).map(|k| outs[k]).collect();
            let q = DominatorQuery::post_dominator(&g, &i_sub, &o_sub);
            let r = min_dominator_with(&mut solver, &q).unwrap();
            let w = flow_lower_bound(FlowQuery { u: i_sub.len(), v: o_sub.len(), n: 2, ring_size: 2 }).unwrap();
            assert!(r.size as f64 >= w - 1e-9, "{imask:b}/{omask:b}: {} < {w}", r.size);
        }
    }
}

#[test]
fn flow_formula() {
    let f = |u, v, n| flow_lower_bound(FlowQuery { u, v, n, ring_size: 2 }).unwrap();
    assert_eq!(f(8, 4, 2), 2.0);
    assert_eq!(f(6, 4, 2), 1.875);
    assert_eq!(f(0, 4, 2), 0.0);
    assert!(flow_lower_bound(FlowQuery { u: 9, v: 1, n: 2, ring_size: 2 }).is_err());
    assert!(flow_lower_bound(FlowQuery { u: 1, v: 5, n: 2, ring_size: 2 }).is_err());
}

#[test]
fn empirical_flow_examples() {
    assert_eq!(empirical_flow(1, 2, &[0, 1], &[0]).unwrap(), 2);
    assert_eq!(empirical_flow(1, 2, &[], &[0]).unwrap(), 1);
    let all: Vec<usize> = (0..8).collect();
    assert!(empirical_flow(2, 2, &all, &[0, 1, 2, 3]).unwrap() >= 4);
    assert!(empirical_flow(3, 2, &[], &[0]).is_err());
    assert!(empirical_flow(2, 5, &[], &[0]).is_err());
    assert!(empirical_flow(2, 2, &[0, 0], &[0]).is_err());
}

#[test]
fn internal_flow_on_one_member() {
    let (g, rep) = build_strassen(2).unwrap();
    let fam = &rep.families[0];
    let c = check_internal_flow_bound(&g, fam, g.outputs(), &[]).unwrap();
    assert_eq!(c.not_post_dominated, 8);
    assert_eq!(c.bound, Some(8.0));
    assert!(c.holds);

    let c = check_internal_flow_bound(&g, fam, &g.outputs()[..1], &[out(&g, 0, 0)]).unwrap();
    assert_eq!(c.bound, None);
    assert!(c.holds);
    assert!(matches!(
        check_internal_flow_bound(&g, fam, g.outputs(), &[g.inputs()[0]]),
        Err(DomflowError::InputInCut(_))
    ));
}

#[test]
fn internal_flow_random_cuts() {
    use rand::seq::SliceRandom;
    let (g, rep) = build_strassen(2).unwrap();
    let fam = &rep.families[0];
    let internal: Vec<u32> = (0..g.vertex_count() as u32).filter(|&v| !g.is_input(v)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let k = rand::Rng::gen_range(&mut rng, 0..=3);
        let gamma: Vec<u32> = internal.choose_multiple(&mut rng, k).copied().collect();
        let c = check_internal_flow_bound(&g, fam, g.outputs(), &gamma).unwrap();
        assert!(c.holds, "{gamma:?}: {c:?}");
    }
}

proptest! {
    #[test]
    fn mincut_matches_oracle(seed in any::<u64>(), size in 4usize..=40, k in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_dag(size, &mut rng);
        let pool: Vec<u32> = (0..size as u32).collect();
        let targets: Vec<u32> = rand::seq::SliceRandom::choose_multiple(&pool[..], &mut rng, k).copied().collect();
        let q = DominatorQuery::dominator(&g, &targets);
        let r = min_dominator(&q).unwrap();
        prop_assert!(is_dominator(&q, &r.witness).unwrap());
        prop_assert_eq!(r.witness.len(), r.size);
        let b = brute_force_min_dominator(&q, size).unwrap();
        prop_assert_eq!(b.size, r.size);
    }
}
