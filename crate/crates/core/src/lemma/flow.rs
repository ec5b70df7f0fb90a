//! Empirical information flow of small matrix products.

use rayon::prelude::*;

use super::{LemmaError, LemmaVerdict, Tally};
use crate::domflow::{empirical_flow, flow_lower_bound, DomflowError, FlowQuery};

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

/// For every input subset `X1` with a size in `x_sizes` and every output
/// subset `Y1` with a size in `y_sizes`, the outputs `Y1` take at least
/// `p^ceil(w)` values as `X1` varies, where `w` is the flow lower bound.
pub fn verify_empirical_flow(
    n: usize,
    p: u64,
    x_sizes: &[usize],
    y_sizes: &[usize],
) -> Result<LemmaVerdict, LemmaError> {
    let mut cases = Vec::new();
    for &xs in x_sizes {
        for &ys in y_sizes {
            for x1 in subsets(2 * n * n, xs) {
                for y1 in subsets(n * n, ys) {
                    cases.push((x1.clone(), y1));
                }
            }
        }
    }
    let results: Vec<Result<Option<String>, DomflowError>> = cases
        .par_iter()
        .map(|(x1, y1)| {
            let w = flow_lower_bound(FlowQuery {
                u: x1.len(),
                v: y1.len(),
                n,
                ring_size: p,
            })?;
            let need = p.pow(w.ceil() as u32);
            let got = empirical_flow(n, p, x1, y1)?;
            Ok((got < need).then(|| format!("X1={x1:?} Y1={y1:?}: {got} values < {need}")))
        })
        .collect();
    let mut t = Tally::new("flow");
    for r in results {
        t.record(r?);
    }
    Ok(t.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf2_two_by_two() {
        let v = verify_empirical_flow(2, 2, &[4, 6, 8], &[2, 4]).unwrap();
        assert_eq!(v.instances_checked, 99 * 7);
        assert!(v.passed(), "{:?}", v.violations);
    }

    #[test]
    fn subset_counts() {
        assert_eq!(subsets(8, 4).len(), 70);
        assert_eq!(subsets(4, 0), vec![Vec::<usize>::new()]);
    }
}
