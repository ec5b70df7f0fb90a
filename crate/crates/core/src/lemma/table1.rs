//! Encoder connectivity: for every subset `Y` of the seven encoder outputs,
//! the largest set of encoder inputs matched to distinct members of `Y`.

use serde::{Deserialize, Serialize};

use super::{LemmaError, LemmaVerdict, Tally};
use crate::builders::{encoder_supports, Side};

/// The bundled golden table, one row per output subset of the `A` encoder.
pub const TABLE1_CSV: &str = include_str!("../../data/table1_encA.csv");

/// An output subset `Y`, encoded as `sum y_i 2^(7-i)` over outputs `1..=7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EncoderSubsetCode(u8);

impl EncoderSubsetCode {
    pub fn new(code: u32) -> Result<Self, LemmaError> {
        if code < 128 {
            Ok(EncoderSubsetCode(code as u8))
        } else {
            Err(LemmaError::BadCode(code))
        }
    }

    pub fn from_bits(bits: [u8; 7]) -> Self {
        EncoderSubsetCode(bits.iter().fold(0, |c, &b| (c << 1) | (b & 1)))
    }

    pub fn code(self) -> u8 {
        self.0
    }

    /// `[y1, .., y7]`.
    pub fn bits(self) -> [u8; 7] {
        std::array::from_fn(|i| (self.0 >> (6 - i)) & 1)
    }

    /// Members of `Y`, numbered `1..=7`.
    pub fn outputs(self) -> Vec<usize> {
        (1..=7).filter(|&i| self.bits()[i - 1] == 1).collect()
    }

    pub fn size(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn all() -> impl Iterator<Item = EncoderSubsetCode> {
        (0..128).map(EncoderSubsetCode)
    }
}

/// Maximum matching between the four encoder inputs and the outputs in `Y`
/// along encoder edges. A pass-through output is adjacent only to its input.
pub fn encoder_max_disjoint(side: Side, code: EncoderSubsetCode) -> usize {
    max_matching(&encoder_supports(side), code)
}

fn max_matching(supports: &[Vec<usize>], code: EncoderSubsetCode) -> usize {
    fn augment(
        y: usize,
        sup: &[Vec<usize>],
        seen: &mut [bool; 4],
        owner: &mut [Option<usize>; 4],
    ) -> bool {
        for &x in &sup[y] {
            if !seen[x] {
                seen[x] = true;
                if owner[x].is_none_or(|o| augment(o, sup, seen, owner)) {
                    owner[x] = Some(y);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = [None; 4];
    code.outputs()
        .into_iter()
        .filter(|&k| augment(k - 1, supports, &mut [false; 4], &mut owner))
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Row {
    pub code: u8,
    pub size: u8,
    pub bits: [u8; 7],
    pub x: u8,
}

impl Table1Row {
    fn computed(code: EncoderSubsetCode) -> Self {
        Table1Row {
            code: code.code(),
            size: code.size() as u8,
            bits: code.bits(),
            x: encoder_max_disjoint(Side::A, code) as u8,
        }
    }

    fn describe(&self) -> String {
        let bits: String = self.bits.iter().map(|b| char::from(b'0' + b)).collect();
        format!("y={bits} |Y|={} X={}", self.size, self.x)
    }
}

/// Parses [`TABLE1_CSV`]. Lines starting with `#` are comments.
pub fn golden_table1() -> Result<Vec<Table1Row>, LemmaError> {
    let mut rows = Vec::new();
    let mut lines = TABLE1_CSV
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "code,size,y1,y2,y3,y4,y5,y6,y7,x" => {}
        other => return Err(LemmaError::Golden(format!("bad header {other:?}"))),
    }
    for (i, line) in lines {
        let f: Vec<u8> = line
            .split(',')
            .map(|t| t.trim().parse::<u8>())
            .collect::<Result<_, _>>()
            .map_err(|e| LemmaError::Golden(format!("line {}: {e}", i + 1)))?;
        if f.len() != 10 {
            return Err(LemmaError::Golden(format!("line {}: expected 10 fields", i + 1)));
        }
        rows.push(Table1Row {
            code: f[0],
            size: f[1],
            bits: f[2..9].try_into().expect("seven bits"),
            x: f[9],
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Verdict {
    pub verdict: LemmaVerdict,
    /// Golden rows equal to the computed row for their code.
    pub rows_matched: usize,
    pub rows_total: usize,
    /// Evaluations, over both sides and all codes, outside the sandwich bound.
    pub sandwich_violations: usize,
    /// Side-B values equal side-A values under the encoder isomorphism.
    pub side_b_matches: bool,
}

impl Table1Verdict {
    pub fn summary(&self) -> String {
        format!("{}/{} match", self.rows_matched, self.rows_total)
    }
}

/// Input permutation `s` and output permutation `p` (0-based) with
/// `supports_b[p[k]] = s(supports_a[k])`, if any.
fn encoder_isomorphism() -> Option<([usize; 4], [usize; 7])> {
    let (sa, sb) = (encoder_supports(Side::A), encoder_supports(Side::B));
    let mut perm = [0, 1, 2, 3];
    loop {
        let mut map = [usize::MAX; 7];
        let ok = (0..7).all(|k| {
            let mut img: Vec<usize> = sa[k].iter().map(|&x| perm[x]).collect();
            img.sort_unstable();
            match sb.iter().position(|s| *s == img) {
                Some(j) if !map.contains(&j) => {
                    map[k] = j;
                    true
                }
                _ => false,
            }
        });
        if ok {
            return Some((perm, map));
        }
        if !next_permutation(&mut perm) {
            return None;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Compares every computed side-A row with the golden table, checks the
/// bound `min(|Y|, 1 + ceil((|Y|-1)/2)) <= |X| <= |Y|` on both sides, and
/// compares side B with side A through the encoder isomorphism.
pub fn verify_table1() -> Result<Table1Verdict, LemmaError> {
    let golden = golden_table1()?;
    let mut t = Tally::new("table1");
    let mut matched = 0;
    for code in EncoderSubsetCode::all() {
        let want = Table1Row::computed(code);
        let found: Vec<&Table1Row> = golden.iter().filter(|r| r.code == code.code()).collect();
        let issue = match found.as_slice() {
            [] => Some(format!("code {}: missing from the golden table", code.code())),
            [g] if **g == want => {
                matched += 1;
                None
            }
            [g] => Some(format!(
                "code {}: golden {}, computed {}",
                code.code(),
                g.describe(),
                want.describe()
            )),
            many => Some(format!("code {}: {} golden rows", code.code(), many.len())),
        };
        t.record(issue);
    }
    if golden.len() != 128 {
        t.record(Some(format!("golden table has {} rows, expected 128", golden.len())));
    }

    let mut sandwich_violations = 0;
    for side in [Side::A, Side::B] {
        for code in EncoderSubsetCode::all() {
            let y = code.size();
            let x = encoder_max_disjoint(side, code);
            let low = y.min(1 + (y.saturating_sub(1)).div_ceil(2));
            let bad = x < low || x > y;
            sandwich_violations += bad as usize;
            t.record(bad.then(|| {
                format!("{side:?} code {}: |X|={x} outside [{low}, {y}]", code.code())
            }));
        }
    }

    let side_b_matches = match encoder_isomorphism() {
        Some((_, map)) => EncoderSubsetCode::all().all(|code| {
            let mut bits = [0u8; 7];
            for k in code.outputs() {
                bits[map[k - 1]] = 1;
            }
            let image = EncoderSubsetCode::from_bits(bits);
            encoder_max_disjoint(Side::A, code) == encoder_max_disjoint(Side::B, image)
        }),
        None => false,
    };
    t.record((!side_b_matches).then(|| "side B differs from side A".to_string()));

    Ok(Table1Verdict {
        verdict: t.finish(),
        rows_matched: matched,
        rows_total: 128,
        sandwich_violations,
        side_b_matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(code: u32) -> usize {
        encoder_max_disjoint(Side::A, EncoderSubsetCode::new(code).unwrap())
    }

    #[test]
    fn codes() {
        let c = EncoderSubsetCode::new(88).unwrap();
        assert_eq!(c.outputs(), vec![1, 3, 4]);
        assert_eq!(EncoderSubsetCode::from_bits(c.bits()), c);
        assert!(EncoderSubsetCode::new(128).is_err());
        for c in EncoderSubsetCode::all() {
            assert_eq!(EncoderSubsetCode::from_bits(c.bits()), c);
        }
    }

    #[test]
    fn examples() {
        assert_eq!(x(127), 4);
        assert_eq!(x(88), 2);
        assert_eq!(x(0), 0);
        assert_eq!(x(29), 3);
    }

    #[test]
    fn golden_parses() {
        let g = golden_table1().unwrap();
        assert_eq!(g.len(), 128);
        assert_eq!(g[0], Table1Row { code: 0, size: 0, bits: [0; 7], x: 0 });
    }

    #[test]
    fn isomorphism_exists() {
        assert!(encoder_isomorphism().is_some());
    }

    #[test]
    fn verdict_lists_every_disagreement() {
        let v = verify_table1().unwrap();
        assert!(v.side_b_matches);
        assert_eq!(v.sandwich_violations, 0);
        let golden = golden_table1().unwrap();
        let disagreeing = golden
            .iter()
            .filter(|r| **r != Table1Row::computed(EncoderSubsetCode(r.code)))
            .count();
        assert_eq!(v.rows_matched, 128 - disagreeing);
        assert_eq!(v.verdict.violation_count as usize, disagreeing);
        assert_eq!(v.verdict.instances_checked, 128 + 256 + 1);
    }
}
