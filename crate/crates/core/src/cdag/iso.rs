use std::collections::BTreeMap;

use super::Cdag;

/// Whether two CDAGs are isomorphic as directed graphs with distinguished
/// input and output sets. Vertex names, roles and edge weights are ignored.
///
/// Colour refinement over predecessor and successor multisets, run jointly on
/// both graphs, with individualisation and backtracking when classes stay
/// ambiguous. A candidate bijection is always checked edge by edge.
pub fn is_isomorphic(a: &Cdag, b: &Cdag) -> bool {
    if a.vertex_count() != b.vertex_count()
        || a.edge_count() != b.edge_count()
        || a.inputs().len() != b.inputs().len()
        || a.outputs().len() != b.outputs().len()
    {
        return false;
    }
    let joint = Joint::new(a, b);
    let initial: Vec<u32> = {
        let keys: Vec<_> = (0..joint.len())
            .map(|x| {
                let (g, v) = joint.side(x);
                (g.is_input(v), g.is_output(v), g.in_degree(v), g.out_degree(v))
            })
            .collect();
        intern(&keys)
    };
    search(&joint, initial)
}

struct Joint<'a> {
    a: &'a Cdag,
    b: &'a Cdag,
}

impl<'a> Joint<'a> {
    fn new(a: &'a Cdag, b: &'a Cdag) -> Self {
        Joint { a, b }
    }

    fn len(&self) -> usize {
        self.a.vertex_count() * 2
    }

    fn side(&self, x: usize) -> (&'a Cdag, u32) {
        let n = self.a.vertex_count();
        if x < n {
            (self.a, x as u32)
        } else {
            (self.b, (x - n) as u32)
        }
    }

    fn offset(&self, x: usize) -> usize {
        if x < self.a.vertex_count() {
            0
        } else {
            self.a.vertex_count()
        }
    }
}

fn intern<K: Ord + Clone>(keys: &[K]) -> Vec<u32> {
    let mut table: BTreeMap<K, u32> = BTreeMap::new();
    for k in keys {
        table.entry(k.clone()).or_insert(0);
    }
    for (i, v) in table.values_mut().enumerate() {
        *v = i as u32;
    }
    keys.iter().map(|k| table[k]).collect()
}

fn class_count(colors: &[u32]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m as usize + 1)
}

fn refine(joint: &Joint<'_>, mut colors: Vec<u32>) -> Vec<u32> {
    let mut classes = class_count(&colors);
    loop {
        let keys: Vec<(u32, Vec<u32>, Vec<u32>)> = (0..joint.len())
            .map(|x| {
                let (g, v) = joint.side(x);
                let off = joint.offset(x);
                let mut p: Vec<u32> = g.preds(v).iter().map(|&u| colors[off + u as usize]).collect();
                let mut s: Vec<u32> = g.succs(v).iter().map(|&u| colors[off + u as usize]).collect();
                p.sort_unstable();
                s.sort_unstable();
                (colors[x], p, s)
            })
            .collect();
        colors = intern(&keys);
        let next = class_count(&colors);
        if next == classes {
            return colors;
        }
        classes = next;
    }
}

fn search(joint: &Joint<'_>, colors: Vec<u32>) -> bool {
    let colors = refine(joint, colors);
    let n = joint.a.vertex_count();
    let k = class_count(&colors);
    let mut count_a = vec![0usize; k];
    let mut count_b = vec![0usize; k];
    for (x, &c) in colors.iter().enumerate() {
        if x < n {
            count_a[c as usize] += 1;
        } else {
            count_b[c as usize] += 1;
        }
    }
    if count_a != count_b {
        return false;
    }
    match (0..k).find(|&c| count_a[c] > 1) {
        None => {
            let mut map = vec![0u32; n];
            let mut rep_b = vec![0u32; k];
            for x in n..2 * n {
                rep_b[colors[x] as usize] = (x - n) as u32;
            }
            for (v, m) in map.iter_mut().enumerate() {
                *m = rep_b[colors[v] as usize];
            }
            check_bijection(joint.a, joint.b, &map)
        }
        Some(c) => {
            let pick = (0..n).find(|&x| colors[x] as usize == c).unwrap();
            let fresh = k as u32;
            for y in (n..2 * n).filter(|&y| colors[y] as usize == c) {
                let mut trial = colors.clone();
                trial[pick] = fresh;
                trial[y] = fresh;
                if search(joint, trial) {
                    return true;
                }
            }
            false
        }
    }
}

fn check_bijection(a: &Cdag, b: &Cdag, map: &[u32]) -> bool {
    let mut hit = vec![false; b.vertex_count()];
    for &m in map {
        if std::mem::replace(&mut hit[m as usize], true) {
            return false;
        }
    }
    for v in 0..a.vertex_count() as u32 {
        let mv = map[v as usize];
        if a.is_input(v) != b.is_input(mv) || a.is_output(v) != b.is_output(mv) {
            return false;
        }
        let mut pa: Vec<u32> = a.preds(v).iter().map(|&u| map[u as usize]).collect();
        let mut pb: Vec<u32> = b.preds(mv).to_vec();
        pa.sort_unstable();
        pb.sort_unstable();
        if pa != pb {
            return false;
        }
    }
    true
}
