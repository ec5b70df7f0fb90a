//! The desk-scale suite behind `mmio report`.
//!
//! Every check produces one or more CSV rows. Random choices all derive from
//! the one suite seed, so a run is reproducible byte for byte.

use std::io::Write;

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use mmio_core::bounds::strassen_seq_bound;
use mmio_core::builders::{build_strassen_full, random_product_instance, BuildOptions, CHECK_PRIME};
use mmio_core::cdag::is_isomorphic;
use mmio_core::domflow::{is_dominator, random_dag};
use mmio_core::lemma::{
    verify_corollary_half, verify_disjoint_paths, verify_dominator_2m, verify_empirical_flow,
    verify_family_disjointness, verify_table1,
};
use mmio_core::pebbles::{generate_naive_schedule, validate_schedule};
use mmio_core::{
    brute_force_min_dominator, build_naive, build_strassen, build_strassen_like,
    generate_blocked_schedule, min_dominator, BoundParams, Cdag, DominatorQuery, LemmaVerdict,
    Meta, Mode, StrassenLikeSpec, SweepOptions,
};

/// Fixed header of `report.csv`.
pub const CSV_HEADER: [&str; 7] = ["experiment", "n", "M", "measured", "bound", "ratio", "pass"];

/// Pairs `(n, M)` for the schedule-versus-bound rows.
pub const SCHEDULE_CASES: [(usize, usize); 4] = [(8, 4), (16, 4), (16, 16), (32, 16)];
/// Largest accepted measured/bound ratio for a generated schedule.
pub const MAX_RATIO: f64 = 100.0;
/// Cache size and dimensions of the scaling regression.
pub const SCALING_CACHE: usize = 8;
pub const SCALING_DIMS: [usize; 4] = [8, 16, 32, 64];

pub const ORACLE_QUERIES: usize = 200;
pub const ORACLE_MAX_VERTICES: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub n: String,
    #[serde(rename = "M")]
    pub m: String,
    pub measured: String,
    pub bound: String,
    pub ratio: String,
    pub pass: bool,
}

impl Row {
    fn new(experiment: &str, n: impl ToString, m: impl ToString) -> Self {
        Row {
            experiment: experiment.to_string(),
            n: n.to_string(),
            m: m.to_string(),
            measured: String::new(),
            bound: String::new(),
            ratio: String::new(),
            pass: false,
        }
    }

    fn values(mut self, measured: f64, bound: f64, pass: bool) -> Self {
        self.measured = num(measured);
        self.bound = num(bound);
        self.ratio = format!("{:.4}", measured / bound.max(1.0));
        self.pass = pass;
        self
    }

    /// `measured` of `bound` instances passed.
    fn tally(experiment: &str, n: impl ToString, m: impl ToString, v: &LemmaVerdict) -> Self {
        let ok = v.instances_checked - v.violation_count;
        Row::new(experiment, n, m).values(ok as f64, v.instances_checked as f64, v.passed())
    }
}

fn num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.4}")
    }
}

/// One acceptance check and its rows.
#[derive(Debug, Clone)]
pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub rows: Vec<Row>,
    /// Human-readable findings, including the violations behind failed rows.
    pub notes: Vec<String>,
}

impl Check {
    fn new(id: u8, name: &'static str) -> Self {
        Check {
            id,
            name,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }

    /// `criterion <id> <name>: PASS|FAIL (<notes>)`.
    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut s = format!("criterion {} {}: {verdict}", self.id, self.name);
        if !self.notes.is_empty() {
            s += &format!(" ({})", self.notes.join("; "));
        }
        s
    }

    fn note(&mut self, v: &LemmaVerdict) {
        self.notes.push(v.summary());
        self.notes.extend(v.violations.iter().take(3).cloned());
    }
}

/// Per-check seeds drawn in a fixed order from the suite seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Seeds {
    pub correctness: u64,
    pub dominators: u64,
    pub paths: u64,
    pub oracle: u64,
}

impl Seeds {
    pub fn derive(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Seeds {
            correctness: rng.gen(),
            dominators: rng.gen(),
            paths: rng.gen(),
            oracle: rng.gen(),
        }
    }
}

pub fn table1() -> Result<Check> {
    let mut c = Check::new(1, "table1");
    let v = verify_table1()?;
    c.rows.push(Row::new("table1-rows", 2, "").values(
        v.rows_matched as f64,
        v.rows_total as f64,
        v.rows_matched == v.rows_total,
    ));
    let ok = 256 - v.sandwich_violations;
    c.rows.push(Row::new("table1-sandwich", 2, "").values(ok as f64, 256.0, ok == 256));
    c.rows.push(Row::new("table1-side-b", 2, "").values(
        v.side_b_matches as u8 as f64,
        1.0,
        v.side_b_matches,
    ));
    c.notes.push(v.summary());
    c.notes.extend(v.verdict.violations.iter().take(3).cloned());
    Ok(c)
}

pub const CORRECTNESS_DIMS: [usize; 5] = [1, 2, 4, 8, 16];
pub const CORRECTNESS_TRIALS: usize = 8;

pub fn cdag_correctness(seed: u64) -> Result<Check> {
    let mut c = Check::new(2, "cdag-correctness");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = StrassenLikeSpec::strassen();
    for n in CORRECTNESS_DIMS {
        let (s, _) = build_strassen(n)?;
        let (l, _) = build_strassen_like(&spec, n)?;
        let (mut ok_s, mut ok_l) = (0, 0);
        for _ in 0..CORRECTNESS_TRIALS {
            let (x, want) = random_product_instance(n, CHECK_PRIME, &mut rng);
            ok_s += (s.evaluate_mod(&x, CHECK_PRIME) == want) as usize;
            ok_l += (l.evaluate_mod(&x, CHECK_PRIME) == want) as usize;
        }
        let t = CORRECTNESS_TRIALS as f64;
        c.rows.push(Row::new("evaluate-strassen", n, "").values(ok_s as f64, t, ok_s == CORRECTNESS_TRIALS));
        c.rows.push(Row::new("evaluate-like", n, "").values(ok_l as f64, t, ok_l == CORRECTNESS_TRIALS));
    }
    c.notes.push(format!("seed {seed}, modulus {CHECK_PRIME}"));
    Ok(c)
}

pub fn families() -> Result<Check> {
    let mut c = Check::new(3, "families");
    let n = 8;
    let b = build_strassen_full(n, BuildOptions::default())?;
    for (level, want) in [(1usize, 7usize), (2, 49)] {
        let v = verify_family_disjointness(&b.cdag, &b.report, level)?;
        let fam = b.report.families.iter().find(|f| f.level == level);
        let (count, iso) = match fam {
            Some(f) => {
                let (small, _) = build_strassen(f.block_dim)?;
                let mut iso = 0;
                for m in &f.members {
                    iso += is_isomorphic(&b.cdag.induced(m)?, &small) as usize;
                }
                (f.members.len(), iso)
            }
            None => (0, 0),
        };
        let pass = v.passed() && count == want && iso == want;
        c.rows.push(Row::new(&format!("family-level-{level}"), n, "").values(iso as f64, want as f64, pass));
        if !pass {
            c.note(&v);
            c.notes.push(format!("level {level}: {count} members, {iso} isomorphic"));
        }
    }
    Ok(c)
}

pub fn corollary_half() -> Result<Check> {
    let mut c = Check::new(4, "corollary-half");
    let (g, _) = build_strassen(2)?;
    let two = Cdag::disjoint_union(&[&g, &g], Meta::new("union", serde_json::json!({ "copies": 2 })))?;
    for (name, h) in [("corollary-half", &g), ("corollary-half-2x", &two)] {
        let v = verify_corollary_half(h)?;
        c.rows.push(Row::tally(name, 2, "", &v));
        c.note(&v);
    }
    Ok(c)
}

pub const DOMINATOR_SAMPLES: usize = 10_000;

pub fn dominator_2m(seed: u64) -> Result<Check> {
    let mut c = Check::new(5, "dominator-2m");
    for n in [4u64, 8] {
        let opts = SweepOptions {
            samples: DOMINATOR_SAMPLES,
            seed,
            ..SweepOptions::default()
        };
        let v = verify_dominator_2m(n, 1, &opts)?;
        c.rows.push(Row::tally("dominator-2m", n, 1, &v));
        c.note(&v);
    }
    Ok(c)
}

pub const PATH_SAMPLES: usize = 500;

pub fn disjoint_paths(seed: u64) -> Result<Check> {
    let mut c = Check::new(6, "disjoint-paths");
    let v = verify_disjoint_paths(4, 1, PATH_SAMPLES, seed)?;
    c.rows.push(Row::tally("disjoint-paths", 4, 1, &v));
    c.note(&v);
    Ok(c)
}

pub fn empirical_flow() -> Result<Check> {
    let mut c = Check::new(7, "empirical-flow");
    let v = verify_empirical_flow(2, 2, &[4, 6, 8], &[2, 4])?;
    c.rows.push(Row::tally("flow-gf2", 2, "", &v));
    c.note(&v);
    Ok(c)
}

pub fn schedule_vs_bound() -> Result<Check> {
    let mut c = Check::new(8, "schedule-vs-bound");
    for (n, m) in SCHEDULE_CASES {
        let b = strassen_seq_bound(&BoundParams::new(n as u64, m as u64))?;
        let exact = b.exact.context("bound is not an exact integer")?;
        let mut row = Row::new("blocked-vs-bound", n, m);
        row.bound = exact.to_string();
        let (g, _) = build_strassen(n)?;
        let stats = generate_blocked_schedule(n, m)
            .map_err(anyhow::Error::from)
            .and_then(|s| Ok(validate_schedule(&g, &s, m, Mode::NoRecompute)?));
        match stats {
            Ok(st) => {
                let ratio = st.io_total as f64 / exact.max(1) as f64;
                let pass = st.io_total >= exact && ratio < MAX_RATIO;
                row = row.values(st.io_total as f64, exact as f64, pass);
                if !pass {
                    c.notes.push(format!("n={n} M={m}: io {} vs bound {exact}, ratio {ratio:.1}", st.io_total));
                }
            }
            Err(e) => c.notes.push(format!("n={n} M={m}: {e}")),
        }
        c.rows.push(row);
    }
    Ok(c)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn scaling() -> Result<Check> {
    let mut c = Check::new(9, "scaling");
    let m = SCALING_CACHE;
    let dims = format!("{}-{}", SCALING_DIMS[0], SCALING_DIMS[SCALING_DIMS.len() - 1]);
    let xs: Vec<f64> = SCALING_DIMS.iter().map(|&n| n as f64).collect();
    let (mut blocked, mut naive) = (Vec::new(), Vec::new());
    for n in SCALING_DIMS {
        let (g, _) = build_strassen(n)?;
        let s = generate_blocked_schedule(n, m)?;
        blocked.push(validate_schedule(&g, &s, m, Mode::NoRecompute)?.io_total as f64);
        let g = build_naive(n)?;
        let s = generate_naive_schedule(n, m)?;
        naive.push(validate_schedule(&g, &s, m, Mode::NoRecompute)?.io_total as f64);
    }
    for (name, ios, want, tol) in [
        ("slope-blocked", &blocked, 7f64.log2(), 0.15),
        ("slope-naive", &naive, 3.0, 0.2),
    ] {
        let slope = loglog_slope(&xs, ios);
        c.rows.push(Row::new(name, &dims, m).values(slope, want, (slope - want).abs() <= tol));
        c.notes.push(format!("{name} {slope:.3}"));
    }
    Ok(c)
}

pub fn oracle(seed: u64) -> Result<Check> {
    let mut c = Check::new(10, "oracle-equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agree = 0;
    for i in 0..ORACLE_QUERIES {
        let g = random_dag(rng.gen_range(4..=ORACLE_MAX_VERTICES), &mut rng);
        let k = rng.gen_range(1..=4.min(g.vertex_count()));
        let picked = rand::seq::index::sample(&mut rng, g.vertex_count(), k);
        let mut targets: Vec<u32> = picked.into_iter().map(|v| v as u32).collect();
        targets.sort_unstable();
        let q = DominatorQuery::dominator(&g, &targets);
        let cut = min_dominator(&q)?;
        let brute = brute_force_min_dominator(&q, targets.len())?;
        let verified = is_dominator(&q, &cut.witness)? && is_dominator(&q, &brute.witness)?;
        if cut.size == brute.size && cut.witness.len() == cut.size && verified {
            agree += 1;
        } else if c.notes.len() < 3 {
            c.notes.push(format!("query {i}: min-cut {} vs brute force {}", cut.size, brute.size));
        }
    }
    let q = ORACLE_QUERIES as f64;
    c.rows.push(Row::new("oracle-equivalence", ORACLE_MAX_VERTICES, "").values(agree as f64, q, agree == ORACLE_QUERIES));
    c.notes.push(format!("seed {seed}"));
    Ok(c)
}

/// Every check of the desk suite, in criterion order.
pub fn desk(seed: u64) -> Result<Vec<Check>> {
    let s = Seeds::derive(seed);
    Ok(vec![
        table1()?,
        cdag_correctness(s.correctness)?,
        families()?,
        corollary_half()?,
        dominator_2m(s.dominators)?,
        disjoint_paths(s.paths)?,
        empirical_flow()?,
        schedule_vs_bound()?,
        scaling()?,
        oracle(s.oracle)?,
    ])
}

pub fn write_csv<W: Write>(checks: &[Check], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in checks.iter().flat_map(|c| &c.rows) {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
