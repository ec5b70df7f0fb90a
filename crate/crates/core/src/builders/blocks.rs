//! The Strassen encoder and decoder blocks.
//!
//! Adjacency is transcribed from the block drawings (input block -> the
//! numbered outputs it feeds); signs come from the seven sub-products
//! `M1..M7` and the four output formulas of Strassen's algorithm.

use serde_json::json;

use super::scheme::{Combination, Scheme};
use crate::cdag::{Cdag, DraftCdag, Meta};
use crate::vertex::{Role, VertexId};

/// Which factor an encoder combines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn input_role(self) -> Role {
        match self {
            Side::A => Role::InputA,
            Side::B => Role::InputB,
        }
    }

    pub fn encoder_role(self) -> Role {
        match self {
            Side::A => Role::EncA,
            Side::B => Role::EncB,
        }
    }
}

// Block order is row-major: 0 = (1,1), 1 = (1,2), 2 = (2,1), 3 = (2,2).
const ENC_A_FEEDS: [(usize, &[usize]); 4] = [
    (0, &[5, 1, 3, 6]),
    (1, &[7, 5]),
    (2, &[2, 6]),
    (3, &[2, 1, 4, 7]),
];
const ENC_B_FEEDS: [(usize, &[usize]); 4] = [
    (0, &[4, 1, 2, 6]),
    (1, &[3, 6]),
    (2, &[7, 4]),
    (3, &[7, 1, 5, 3]),
];
/// Output block -> the products it sums.
const DEC_SUMS: [(usize, &[usize]); 4] = [
    (0, &[4, 1, 7, 5]),
    (1, &[3, 5]),
    (2, &[2, 4]),
    (3, &[6, 1, 2, 3]),
];

// (output, block) pairs entering with coefficient -1:
// M6 = (A21 - A11)(..), M7 = (A12 - A22)(..), M3 = (..)(B12 - B22),
// M4 = (..)(B21 - B11), C11 = .. - M5 .., C22 = M1 - M2 + ..
const NEG_A: [(usize, usize); 2] = [(6, 0), (7, 3)];
const NEG_B: [(usize, usize); 2] = [(3, 3), (4, 0)];
const NEG_DEC: [(usize, usize); 2] = [(0, 5), (3, 2)];

fn encoder_rows(feeds: &[(usize, &[usize]); 4], neg: &[(usize, usize)]) -> Vec<Combination> {
    let mut rows = vec![Combination::default(); 7];
    for &(block, outs) in feeds {
        for &k in outs {
            let c = if neg.contains(&(k, block)) { -1 } else { 1 };
            rows[k - 1].terms.push((block, c));
        }
    }
    for r in &mut rows {
        r.terms.sort_unstable();
    }
    rows
}

fn decoder_rows() -> Vec<Combination> {
    DEC_SUMS
        .iter()
        .map(|&(o, ks)| {
            let mut terms: Vec<(usize, i64)> = ks
                .iter()
                .map(|&k| (k - 1, if NEG_DEC.contains(&(o, k)) { -1 } else { 1 }))
                .collect();
            terms.sort_unstable();
            Combination { terms }
        })
        .collect()
}

/// Strassen's algorithm as a (2, 7) scheme.
pub(crate) fn strassen_scheme() -> Scheme {
    Scheme {
        n0: 2,
        m0: 7,
        enc_a: encoder_rows(&ENC_A_FEEDS, &NEG_A),
        enc_b: encoder_rows(&ENC_B_FEEDS, &NEG_B),
        dec: decoder_rows(),
    }
}

/// Input blocks (row-major, `0..4`) feeding each encoder output `1..=7`,
/// as drawn. Entry `k` lists the blocks of output `k + 1` in ascending order.
pub fn encoder_supports(side: Side) -> Vec<Vec<usize>> {
    let feeds = match side {
        Side::A => &ENC_A_FEEDS,
        Side::B => &ENC_B_FEEDS,
    };
    let mut sup = vec![Vec::new(); 7];
    for &(block, outs) in feeds {
        for &k in outs {
            sup[k - 1].push(block);
        }
    }
    for s in &mut sup {
        s.sort_unstable();
    }
    sup
}

/// Stand-alone encoder block: four inputs, seven outputs numbered 1..=7.
/// Outputs with a single unit-coefficient predecessor are that input vertex.
pub fn build_encoder(side: Side) -> Cdag {
    let scheme = strassen_scheme();
    let rows = match side {
        Side::A => &scheme.enc_a,
        Side::B => &scheme.enc_b,
    };
    let mut d = DraftCdag::new(Meta::new(
        "encoder",
        json!({ "side": format!("{side:?}") }),
    ));
    let inputs: Vec<u32> = (0..4u32)
        .map(|b| d.add_vertex(VertexId::new(&[], side.input_role(), &[b / 2, b % 2])))
        .collect();
    for &v in &inputs {
        d.declare_input(v);
    }
    for (k, row) in rows.iter().enumerate() {
        let out = match row.pass_through() {
            Some(block) => inputs[block],
            None => {
                let v = d.add_vertex(VertexId::new(&[], side.encoder_role(), &[k as u32 + 1]));
                for &(block, c) in &row.terms {
                    d.add_weighted_edge(inputs[block], v, c);
                }
                v
            }
        };
        d.declare_output(out);
    }
    d.seal().expect("encoder block is well formed")
}

/// Stand-alone decoder block: inputs `M1..M7`, outputs `C11, C12, C21, C22`.
pub fn build_decoder() -> Cdag {
    let scheme = strassen_scheme();
    let mut d = DraftCdag::new(Meta::new("decoder", json!({})));
    let ms: Vec<u32> = (1..=7u32)
        .map(|k| d.add_vertex(VertexId::new(&[k as u16], Role::Product, &[])))
        .collect();
    for &m in &ms {
        d.declare_input(m);
    }
    for (o, row) in scheme.dec.iter().enumerate() {
        let c = d.add_vertex(VertexId::new(&[], Role::DecOut, &[o as u32 / 2, o as u32 % 2]));
        for &(k, w) in &row.terms {
            d.add_weighted_edge(ms[k], c, w);
        }
        d.declare_output(c);
    }
    d.seal().expect("decoder block is well formed")
}
