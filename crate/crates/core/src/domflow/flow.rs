//! Grigoriev information flow of matrix multiplication.

use serde::{Deserialize, Serialize};

use super::DomflowError;

/// Hard cap on the number of function evaluations in [`empirical_flow`].
pub const EMPIRICAL_FLOW_CAP: u128 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowQuery {
    /// Size of the input subset, at most `2n^2`.
    pub u: usize,
    /// Size of the output subset, at most `n^2`.
    pub v: usize,
    pub n: usize,
    pub ring_size: u64,
}

/// `max(0, (v - (2n^2 - u)^2 / (4n^2)) / 2)`.
pub fn flow_lower_bound(q: FlowQuery) -> Result<f64, DomflowError> {
    let n2 = q.n * q.n;
    if q.n == 0 || q.u > 2 * n2 || q.v > n2 {
        return Err(DomflowError::InvalidFlowQuery(format!(
            "need n >= 1, u <= 2n^2, v <= n^2; got n={}, u={}, v={}",
            q.n, q.u, q.v
        )));
    }
    let slack = (2 * n2 - q.u) as f64;
    let w = 0.5 * (q.v as f64 - slack * slack / (4 * n2) as f64);
    Ok(w.max(0.0))
}

/// Largest number of distinct values the outputs `y1` take while the inputs
/// `x1` range over all of `Z_p`, maximised over the values of the remaining
/// inputs. Inputs are indexed `A` row-major then `B` row-major, outputs
/// row-major.
pub fn empirical_flow(n: usize, p: u64, x1: &[usize], y1: &[usize]) -> Result<u64, DomflowError> {
    let bad = |msg: String| Err(DomflowError::InvalidFlowQuery(msg));
    if !(1..=2).contains(&n) {
        return bad(format!("n must be 1 or 2, got {n}"));
    }
    if p != 2 && p != 3 {
        return bad(format!("ring modulus must be 2 or 3, got {p}"));
    }
    let (ni, no) = (2 * n * n, n * n);
    if x1.len() > 8 {
        return bad(format!("at most 8 free inputs, got {}", x1.len()));
    }
    let mut free = vec![false; ni];
    for &x in x1 {
        if x >= ni || std::mem::replace(&mut free[x], true) {
            return bad(format!("input index {x} out of range or repeated"));
        }
    }
    let mut seen_out = vec![false; no];
    for &y in y1 {
        if y >= no || std::mem::replace(&mut seen_out[y], true) {
            return bad(format!("output index {y} out of range or repeated"));
        }
    }
    let work = (p as u128).pow(ni as u32);
    if work > EMPIRICAL_FLOW_CAP {
        return Err(DomflowError::InstanceTooLarge {
            work,
            cap: EMPIRICAL_FLOW_CAP,
        });
    }
    let fixed: Vec<usize> = (0..ni).filter(|&i| !free[i]).collect();
    let tuples = (p as usize).pow(y1.len() as u32);
    let mut hit = vec![false; tuples];
    let mut x = vec![0u64; ni];
    let mut best = 0u64;

    let fixed_count = (p as u128).pow(fixed.len() as u32) as u64;
    let free_count = (p as u128).pow(x1.len() as u32) as u64;
    for f in 0..fixed_count {
        spread(f, p, &fixed, &mut x);
        hit.fill(false);
        let mut distinct = 0u64;
        for s in 0..free_count {
            spread(s, p, x1, &mut x);
            let mut code = 0usize;
            for &y in y1 {
                let (i, j) = (y / n, y % n);
                let c = (0..n).map(|k| x[i * n + k] * x[n * n + k * n + j]).sum::<u64>() % p;
                code = code * p as usize + c as usize;
            }
            if !std::mem::replace(&mut hit[code], true) {
                distinct += 1;
            }
        }
        best = best.max(distinct);
    }
    Ok(best)
}

/// Writes the base-`p` digits of `k` into `x` at positions `at`.
fn spread(mut k: u64, p: u64, at: &[usize], x: &mut [u64]) {
    for &i in at {
        x[i] = k % p;
        k /= p;
    }
}
