//! Shared fixtures for the benchmarks.

use mmio_core::{build_strassen, generate_blocked_schedule, Cdag, Schedule};

/// `H^{n x n}` with its blocked schedule at cache size `cache`.
pub fn strassen_with_schedule(n: usize, cache: usize) -> (Cdag, Schedule) {
    let (g, _) = build_strassen(n).expect("n is a power of 2");
    let s = generate_blocked_schedule(n, cache).expect("cache is large enough");
    (g, s)
}

/// Every third output of `g`, a fixed dominator target set.
pub fn spread_outputs(g: &Cdag) -> Vec<u32> {
    g.outputs().iter().step_by(3).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        let (g, s) = strassen_with_schedule(4, 16);
        assert!(!s.moves.is_empty());
        assert_eq!(spread_outputs(&g).len(), 6);
    }
}
