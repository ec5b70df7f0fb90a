use mmio_core::bounds::{strassen_seq_bound, BoundParams, Regime};
use mmio_core::builders::{
    build_strassen_full, build_strassen_like, random_product_instance, BuildOptions, CHECK_PRIME,
};
use mmio_core::cdag::{from_json, is_isomorphic, to_json};
use mmio_core::domflow::{is_dominator, max_disjoint_paths, min_dominator, DominatorQuery};
use mmio_core::pebbles::{read_trace, validate_schedule, write_trace, Mode};
use mmio_core::{
    build_naive, build_strassen, generate_blocked_schedule, generate_naive_schedule, Cdag,
    StrassenLikeSpec,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn well_formed(g: &Cdag) {
    let pos: Vec<u32> = (0..g.vertex_count() as u32).map(|v| g.topo_pos(v)).collect();
    for (u, v) in g.edges() {
        assert!(pos[u as usize] < pos[v as usize], "edge against topological order");
    }
    let mut ids: Vec<String> = g.ids().iter().map(|i| i.to_string()).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), g.vertex_count());
    for v in 0..g.vertex_count() as u32 {
        assert_eq!(g.in_degree(v) == 0, g.is_input(v));
    }
}

#[test]
fn built_graphs_are_well_formed_and_roundtrip() {
    for n in [1, 2, 4, 8, 16] {
        let (g, _) = build_strassen(n).unwrap();
        well_formed(&g);
        assert_eq!(from_json(&to_json(&g)).unwrap(), g);
        let (l, _) = build_strassen_like(&StrassenLikeSpec::strassen(), n).unwrap();
        well_formed(&l);
        assert_eq!(from_json(&to_json(&l)).unwrap(), l);
        let v = build_naive(n).unwrap();
        well_formed(&v);
        assert_eq!(from_json(&to_json(&v)).unwrap(), v);
    }
}

#[test]
fn family_members_are_smaller_strassen_graphs() {
    let b = build_strassen_full(8, BuildOptions::default()).unwrap();
    for fam in &b.report.families {
        let (want, _) = build_strassen(fam.block_dim).unwrap();
        assert_eq!(fam.members.len(), 7usize.pow(fam.level as u32));
        assert!(fam.is_disjoint());
        for m in &fam.members {
            let sub = b.cdag.induced(m).unwrap();
            assert!(is_isomorphic(&sub, &want), "level {}", fam.level);
        }
        // Apart from a member's own operands, no encoder or decoder vertex of
        // a shallower level sits in a member.
        for m in &fam.members {
            for &v in m {
                let id = b.cdag.id(v);
                let operand = b.cdag.preds(v).iter().all(|u| m.binary_search(u).is_err());
                if !operand && id.role != mmio_core::Role::Product {
                    assert!(id.depth() >= fam.level, "{id} in level-{} member", fam.level);
                }
            }
        }
    }
}

#[test]
fn blocked_schedules_at_the_main_regime_threshold() {
    // n = 2 sqrt(M): the bound equals M.
    for (n, m) in [(4, 4), (8, 16)] {
        let (g, _) = build_strassen(n).unwrap();
        let Ok(s) = generate_blocked_schedule(n, m) else {
            assert!(m < 5);
            continue;
        };
        let st = validate_schedule(&g, &s, m, Mode::NoRecompute).unwrap();
        assert!(st.io_total >= m as u64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn products_evaluate_correctly(seed in any::<u64>(), k in 0u32..4) {
        let n = 1usize << k;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, c) = random_product_instance(n, CHECK_PRIME, &mut rng);
        let (g, _) = build_strassen(n).unwrap();
        prop_assert_eq!(g.evaluate_mod(&x, CHECK_PRIME), c.clone());
        let (l, _) = build_strassen_like(&StrassenLikeSpec::strassen(), n).unwrap();
        prop_assert_eq!(l.evaluate_mod(&x, CHECK_PRIME), c.clone());
        let v = build_naive(n).unwrap();
        prop_assert_eq!(v.evaluate_mod(&x, CHECK_PRIME), c);
    }

    #[test]
    fn generated_schedules_are_valid_and_sound(k in 1u32..4, m in 5usize..80) {
        let n = 1usize << k;
        let (g, _) = build_strassen(n).unwrap();
        let s = generate_blocked_schedule(n, m).unwrap();
        let st = validate_schedule(&g, &s, m, Mode::NoRecompute).unwrap();
        prop_assert_eq!(st.recomputed_vertices, 0);
        prop_assert!(st.peak_red <= m);
        let b = strassen_seq_bound(&BoundParams::new(n as u64, m as u64)).unwrap();
        if b.regime == Regime::Main {
            prop_assert!(st.io_total as f64 >= b.value);
        } else {
            prop_assert!(st.io_total >= 3 * (n * n) as u64);
        }

        let mut buf = Vec::new();
        write_trace(&g, &s, &mut buf).unwrap();
        prop_assert_eq!(read_trace(&g, buf.as_slice()).unwrap(), s);

        let v = build_naive(n).unwrap();
        let s = generate_naive_schedule(n, m).unwrap();
        let st = validate_schedule(&v, &s, m, Mode::NoRecompute).unwrap();
        prop_assert_eq!(st.recomputed_vertices, 0);
    }

    #[test]
    fn dominator_witnesses_separate(seed in any::<u64>(), size in 1usize..12) {
        use rand::seq::SliceRandom;
        let (g, _) = build_strassen(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<u32> = (0..g.vertex_count() as u32).collect();
        let targets: Vec<u32> = pool.choose_multiple(&mut rng, size).copied().collect();
        let q = DominatorQuery::dominator(&g, &targets);
        let r = min_dominator(&q).unwrap();
        prop_assert!(is_dominator(&q, &r.witness).unwrap());
        prop_assert_eq!(r.size, max_disjoint_paths(&g, g.inputs(), &targets));
        // Removing any witness vertex reopens a path.
        for i in 0..r.witness.len() {
            let mut w = r.witness.clone();
            w.remove(i);
            prop_assert!(!is_dominator(&q, &w).unwrap());
        }
    }
}
