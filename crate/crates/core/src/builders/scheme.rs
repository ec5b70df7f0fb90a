//! Bilinear base schemes: how an `n0 x n0` block product is assembled from
//! `m0` multiplications.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BuildError;

/// Prime used to spot-check a scheme's correctness.
pub const CHECK_PRIME: u64 = 2_147_483_647;
const CHECK_TRIALS: usize = 8;
const CHECK_SEED: u64 = 0x05ee_d0f5_ca1e;

/// Sparse linear combination: `(operand index, coefficient)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Combination {
    pub terms: Vec<(usize, i64)>,
}

impl Combination {
    fn from_dense(row: &[i64]) -> Self {
        Combination {
            terms: row
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| (i, c))
                .collect(),
        }
    }

    /// The operand this combination merely forwards, if it is a single term
    /// with coefficient 1.
    pub fn pass_through(&self) -> Option<usize> {
        match self.terms.as_slice() {
            [(i, 1)] => Some(*i),
            _ => None,
        }
    }

    pub fn is_nontrivial(&self) -> bool {
        self.pass_through().is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Scheme {
    pub n0: usize,
    pub m0: usize,
    pub enc_a: Vec<Combination>,
    pub enc_b: Vec<Combination>,
    pub dec: Vec<Combination>,
}

/// Coefficients of an `(n0, m0)`-Strassen-like algorithm. Blocks are indexed
/// row-major; `enc_a[k]` and `enc_b[k]` give the operands of multiplication
/// `k`, and `dec[o]` combines the products into output block `o`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrassenLikeSpec {
    pub n0: usize,
    pub m0: usize,
    #[serde(rename = "encA")]
    pub enc_a: Vec<Vec<i64>>,
    #[serde(rename = "encB")]
    pub enc_b: Vec<Vec<i64>>,
    pub dec: Vec<Vec<i64>>,
}

pub const SPEC_SCHEMA: &str = "mmspec/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    schema: String,
    #[serde(flatten)]
    spec: StrassenLikeSpec,
}

/// The bundled `strassen_2_7.json`.
pub const STRASSEN_2_7_JSON: &str = include_str!("../../data/strassen_2_7.json");

impl StrassenLikeSpec {
    pub fn from_json(text: &str) -> Result<Self, BuildError> {
        let doc: SpecDoc =
            serde_json::from_str(text).map_err(|e| BuildError::InvalidSpec(e.to_string()))?;
        if doc.schema != SPEC_SCHEMA {
            return Err(BuildError::InvalidSpec(format!(
                "expected schema `{SPEC_SCHEMA}`, found `{}`",
                doc.schema
            )));
        }
        Ok(doc.spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpecDoc {
            schema: SPEC_SCHEMA.to_string(),
            spec: self.clone(),
        })
        .expect("spec serializes")
    }

    pub fn strassen() -> Self {
        Self::from_json(STRASSEN_2_7_JSON).expect("bundled spec parses")
    }

    pub(crate) fn scheme(&self) -> Scheme {
        Scheme {
            n0: self.n0,
            m0: self.m0,
            enc_a: self.enc_a.iter().map(|r| Combination::from_dense(r)).collect(),
            enc_b: self.enc_b.iter().map(|r| Combination::from_dense(r)).collect(),
            dec: self.dec.iter().map(|r| Combination::from_dense(r)).collect(),
        }
    }

    /// Checks shapes, the one-use restriction on linear combinations and the
    /// product identity over a large prime field.
    pub fn validate(&self) -> Result<(), BuildError> {
        let bad = |m: String| Err(BuildError::InvalidSpec(m));
        let (n0, m0) = (self.n0, self.m0);
        if n0 < 2 {
            return bad(format!("n0 must be at least 2, got {n0}"));
        }
        if m0 == 0 {
            return bad("m0 must be positive".into());
        }
        let shape_ok = |rows: &Vec<Vec<i64>>, r: usize, c: usize| {
            rows.len() == r && rows.iter().all(|row| row.len() == c)
        };
        if !shape_ok(&self.enc_a, m0, n0 * n0) {
            return bad(format!("encA must be {m0} x {}", n0 * n0));
        }
        if !shape_ok(&self.enc_b, m0, n0 * n0) {
            return bad(format!("encB must be {m0} x {}", n0 * n0));
        }
        if !shape_ok(&self.dec, n0 * n0, m0) {
            return bad(format!("dec must be {} x {m0}", n0 * n0));
        }
        let scheme = self.scheme();
        for (name, rows) in [("encA", &scheme.enc_a), ("encB", &scheme.enc_b), ("dec", &scheme.dec)] {
            if let Some(k) = rows.iter().position(|r| r.terms.is_empty()) {
                return bad(format!("{name} row {k} is identically zero"));
            }
        }
        for (name, rows) in [("encA", &scheme.enc_a), ("encB", &scheme.enc_b)] {
            for i in 0..rows.len() {
                for j in i + 1..rows.len() {
                    if rows[i].is_nontrivial() && rows[i] == rows[j] {
                        return bad(format!(
                            "{name} rows {i} and {j} repeat a linear combination"
                        ));
                    }
                }
            }
            if !rows.iter().any(Combination::is_nontrivial) {
                return bad(format!("{name} has no non-trivial linear combination"));
            }
        }
        check_identity(&scheme)
    }
}

fn combine(c: &Combination, xs: &[u64], p: u64) -> u64 {
    c.terms.iter().fold(0u128, |acc, &(i, w)| {
        (acc + w.rem_euclid(p as i64) as u128 * xs[i] as u128) % p as u128
    }) as u64
}

fn check_identity(s: &Scheme) -> Result<(), BuildError> {
    let p = CHECK_PRIME;
    let n0 = s.n0;
    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED);
    for _ in 0..CHECK_TRIALS {
        let a: Vec<u64> = (0..n0 * n0).map(|_| rng.gen_range(0..p)).collect();
        let b: Vec<u64> = (0..n0 * n0).map(|_| rng.gen_range(0..p)).collect();
        let m: Vec<u64> = (0..s.m0)
            .map(|k| {
                (combine(&s.enc_a[k], &a, p) as u128 * combine(&s.enc_b[k], &b, p) as u128
                    % p as u128) as u64
            })
            .collect();
        for r in 0..n0 {
            for c in 0..n0 {
                let want = (0..n0).fold(0u128, |acc, t| {
                    (acc + a[r * n0 + t] as u128 * b[t * n0 + c] as u128) % p as u128
                }) as u64;
                let got = combine(&s.dec[r * n0 + c], &m, p);
                if got != want {
                    return Err(BuildError::InvalidSpec(format!(
                        "scheme does not compute the product (block {r},{c})"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::blocks::strassen_scheme;

    #[test]
    fn bundled_spec_matches_block_tables() {
        let spec = StrassenLikeSpec::strassen();
        spec.validate().unwrap();
        assert_eq!(spec.scheme(), strassen_scheme());
    }

    #[test]
    fn rejects_wrong_product() {
        let mut spec = StrassenLikeSpec::strassen();
        spec.dec[1][2] = 0;
        assert!(matches!(spec.validate(), Err(BuildError::InvalidSpec(_))));
    }

    #[test]
    fn rejects_shape_and_reuse() {
        let mut spec = StrassenLikeSpec::strassen();
        spec.enc_a.pop();
        assert!(spec.validate().is_err());

        let mut spec = StrassenLikeSpec::strassen();
        spec.enc_a[1] = spec.enc_a[0].clone();
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("repeat"), "{err}");
    }

    #[test]
    fn definition_based_scheme_is_not_strassen_like() {
        // Eight plain block products: correct, but no non-trivial combination.
        let mut enc_a = vec![];
        let mut enc_b = vec![];
        let mut dec = vec![vec![0; 8]; 4];
        for r in 0..2 {
            for c in 0..2 {
                for t in 0..2 {
                    let k = enc_a.len();
                    let mut ra = vec![0; 4];
                    ra[r * 2 + t] = 1;
                    let mut rb = vec![0; 4];
                    rb[t * 2 + c] = 1;
                    enc_a.push(ra);
                    enc_b.push(rb);
                    dec[r * 2 + c][k] = 1;
                }
            }
        }
        let spec = StrassenLikeSpec { n0: 2, m0: 8, enc_a, enc_b, dec };
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("repeat") || err.contains("non-trivial"), "{err}");
    }

    #[test]
    fn json_roundtrip_and_schema_check() {
        let spec = StrassenLikeSpec::strassen();
        assert_eq!(StrassenLikeSpec::from_json(&spec.to_json()).unwrap(), spec);
        let bad = spec.to_json().replace("mmspec/1", "mmspec/9");
        assert!(StrassenLikeSpec::from_json(&bad).is_err());
    }
}
