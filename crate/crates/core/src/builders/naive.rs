use serde_json::json;

use super::BuildError;
use crate::cdag::{Cdag, DraftCdag, Meta};
use crate::vertex::{Role, VertexId};

/// CDAG of the definition-based algorithm: `n^3` products `A_ik * B_kj`,
/// each output summed left to right with `n - 1` binary additions.
pub fn build_naive(n: usize) -> Result<Cdag, BuildError> {
    if n == 0 {
        return Err(BuildError::NotPowerOf { n, base: 1 });
    }
    let mut d = DraftCdag::new(Meta::new("naive", json!({ "n": n })));
    let idx = |e: usize| [(e / n) as u32, (e % n) as u32];
    let a: Vec<u32> = (0..n * n)
        .map(|e| d.add_vertex(VertexId::new(&[], Role::InputA, &idx(e))))
        .collect();
    let b: Vec<u32> = (0..n * n)
        .map(|e| d.add_vertex(VertexId::new(&[], Role::InputB, &idx(e))))
        .collect();
    for &v in a.iter().chain(&b) {
        d.declare_input(v);
    }
    let mut outs = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0;
            for k in 0..n {
                let p = d.add_vertex(VertexId::new(
                    &[],
                    Role::Product,
                    &[i as u32, k as u32, j as u32],
                ));
                d.add_edge(a[i * n + k], p);
                d.add_edge(b[k * n + j], p);
                acc = if k == 0 {
                    p
                } else {
                    let s = d.add_vertex(VertexId::new(&[], Role::Sum, &[i as u32, j as u32, k as u32]));
                    d.add_edge(acc, s);
                    d.add_edge(p, s);
                    s
                };
            }
            outs.push(acc);
        }
    }
    for v in outs {
        d.declare_output(v);
    }
    Ok(d.seal()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_strassen, random_product_instance, CHECK_PRIME};
    use crate::cdag::is_isomorphic;
    use rand::SeedableRng;

    fn count(g: &Cdag, role: Role) -> usize {
        (0..g.vertex_count() as u32).filter(|&v| g.role(v) == role).count()
    }

    #[test]
    fn counts() {
        let g = build_naive(2).unwrap();
        assert_eq!((count(&g, Role::Product), count(&g, Role::Sum)), (8, 4));
        assert_eq!(g.outputs().len(), 4);
        let g = build_naive(4).unwrap();
        assert_eq!((count(&g, Role::Product), count(&g, Role::Sum)), (64, 48));
        assert_eq!(g.inputs().len(), 32);
    }

    #[test]
    fn n1_matches_strassen_shape() {
        let (h1, _) = build_strassen(1).unwrap();
        assert!(is_isomorphic(&build_naive(1).unwrap(), &h1));
    }

    #[test]
    fn evaluates_products() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 1..=5 {
            let g = build_naive(n).unwrap();
            let (x, c) = random_product_instance(n, CHECK_PRIME, &mut rng);
            assert_eq!(g.evaluate_mod(&x, CHECK_PRIME), c);
        }
    }
}
