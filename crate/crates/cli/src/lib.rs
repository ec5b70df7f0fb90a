//! `mmio`: build Strassen CDAGs, generate and replay pebbling schedules,
//! evaluate I/O lower bounds and run the lemma checks.
//!
//! Exit codes: 0 when everything passes, 1 on a verification violation, 2
//! on a usage or configuration error.

pub mod suite;

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use mmio_core::builders::{
    build_strassen_full, build_strassen_like_full, dimension_of, rebuild_recursive, BuildOptions,
};
use mmio_core::cdag::{from_json, to_dot, to_json};
use mmio_core::lemma::{
    verify_corollary_half, verify_disjoint_paths, verify_dominator_2m, verify_empirical_flow,
    verify_family_disjointness, verify_table1,
};
use mmio_core::pebbles::{
    generate_blocked_schedule_for, generate_naive_schedule_for, read_trace_lines, write_trace,
    BlockedOptions,
};
use mmio_core::{
    build_naive, validate_schedule, BoundParams, BuildReport, Cdag, Formula, LemmaVerdict, Meta,
    Mode, Schedule, StrassenLikeSpec, SweepOptions,
};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser, Serialize)]
#[command(name = "mmio", version, about = "Strassen CDAGs, red-blue pebbling and I/O lower bounds")]
pub struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, env = "MMIO_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Build a CDAG and write it as JSON.
    Build(BuildArgs),
    /// Generate a schedule, validate it and write its trace.
    Schedule(ScheduleArgs),
    /// Replay a schedule trace.
    Simulate(SimulateArgs),
    /// Evaluate a closed-form lower bound.
    Bound(BoundArgs),
    /// Run one of the lemma checks.
    Verify(VerifyArgs),
    /// Run a whole suite and write a CSV report.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Strassen,
    Naive,
    Like,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[arg(long)]
    pub n: usize,
    /// Strassen-like scheme (JSON); the built-in Strassen scheme by default.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Keep pass-through encoder outputs as separate vertices.
    #[arg(long)]
    pub keep_pass_through: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write Graphviz, with the level-1 family clustered.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Blocked,
    Naive,
}

#[derive(Debug, Args, Serialize)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub cdag: PathBuf,
    #[arg(long, value_enum)]
    pub strategy: Strategy,
    #[arg(long)]
    pub cache: usize,
    #[arg(long)]
    pub no_recompute: bool,
    /// Trace output.
    #[arg(long)]
    pub out: PathBuf,
    /// Statistics output; stdout by default.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub cdag: PathBuf,
    #[arg(long)]
    pub trace: PathBuf,
    /// Cache size; the one declared in the trace by default.
    #[arg(long)]
    pub cache: Option<usize>,
    #[arg(long)]
    pub no_recompute: bool,
    /// Statistics output; stdout by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long, value_parser = parse_formula)]
    pub formula: Formula,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub cache: u64,
    #[arg(long, default_value_t = 1)]
    pub procs: u64,
    #[arg(long, default_value_t = 2)]
    pub n0: u64,
    #[arg(long, default_value_t = 7)]
    pub m0: u64,
    /// Number of disjoint sub-problems, for the generic formulas.
    #[arg(long, default_value_t = 0)]
    pub q: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_formula(s: &str) -> Result<Formula, String> {
    s.parse::<Formula>().map_err(|e| {
        let ids: Vec<&str> = Formula::ALL.iter().map(|f| f.id()).collect();
        format!("{e}; expected one of {}", ids.join(", "))
    })
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[command(subcommand)]
    pub check: VerifyCheck,
    /// Verdict JSON output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "check")]
pub enum VerifyCheck {
    /// Encoder connectivity against the golden table.
    Table1,
    /// Dominators of output subsets are at least half their size.
    CorollaryHalf {
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Disjoint copies of the graph to check together.
        #[arg(long, default_value_t = 1)]
        copies: usize,
    },
    /// 4M-subsets of the 2 sqrt(M)-level outputs need 2M dominators.
    #[command(name = "dominator-2m")]
    #[serde(rename = "dominator-2m")]
    Dominator2m {
        #[arg(long, default_value_t = 4)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        cache: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1_000_000)]
        exhaustive_limit: u64,
    },
    /// Vertex-disjoint paths from inputs into output subsets.
    DisjointPaths {
        #[arg(long, default_value_t = 4)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        cache: u64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Sub-CDAG family counts and disjointness.
    Families {
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// A single level; every level from 1 by default.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Empirical information flow over a small prime field.
    Flow {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, value_delimiter = ',', default_values_t = [4, 6, 8])]
        x: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 4])]
        y: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Desk,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[arg(long, value_enum, default_value_t = Suite::Desk)]
    pub suite: Suite,
    #[arg(long)]
    pub out: PathBuf,
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Violation,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Violation => 1,
        }
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Violation
        }
    }
}

/// Exit code for an error that ended the run.
pub const ERROR_CODE: i32 = 2;

/// Runs `cli`, logging its configuration to stderr first.
pub fn run(cli: &Cli) -> Result<Status> {
    eprintln!("mmio: config {}", serde_json::to_string(cli)?);
    match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Schedule(a) => cmd_schedule(cli, a),
        Command::Simulate(a) => cmd_simulate(cli, a),
        Command::Bound(a) => cmd_bound(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Report(a) => cmd_report(cli, a),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Pretty JSON to `path`, or to stdout.
fn emit(path: Option<&Path>, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    match path {
        Some(p) => write_file(p, &text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_cdag(path: &Path) -> Result<Cdag> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_build(a: &BuildArgs) -> Result<Status> {
    let opts = BuildOptions {
        merge_pass_through: !a.keep_pass_through,
    };
    let (g, report): (Cdag, Option<BuildReport>) = match a.algo {
        Algo::Strassen => {
            let b = build_strassen_full(a.n, opts)?;
            (b.cdag, Some(b.report))
        }
        Algo::Naive => (build_naive(a.n)?, None),
        Algo::Like => {
            let spec = match &a.spec {
                Some(p) => {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    StrassenLikeSpec::from_json(&text)?
                }
                None => StrassenLikeSpec::strassen(),
            };
            let b = build_strassen_like_full(&spec, a.n, opts)?;
            (b.cdag, Some(b.report))
        }
    };
    write_file(&a.out, &to_json(&g))?;
    if let Some(dot) = &a.dot {
        let fam = report.as_ref().and_then(|r| r.families.iter().find(|f| f.level == 1));
        write_file(dot, &to_dot(&g, fam))?;
    }
    let families: Vec<Value> = report
        .iter()
        .flat_map(|r| &r.families)
        .map(|f| json!({ "level": f.level, "block_dim": f.block_dim, "members": f.members.len() }))
        .collect();
    emit(
        None,
        &json!({
            "out": a.out,
            "vertices": g.vertex_count(),
            "edges": g.edge_count(),
            "inputs": g.inputs().len(),
            "outputs": g.outputs().len(),
            "families": families,
        }),
    )?;
    Ok(Status::Pass)
}

fn mode(no_recompute: bool) -> Mode {
    if no_recompute {
        Mode::NoRecompute
    } else {
        Mode::Free
    }
}

/// Strassen-sequential bound for graphs built by the Strassen builder.
fn strassen_bound(meta: &Meta, cache: usize) -> Result<Option<Value>> {
    if meta.builder != "strassen" {
        return Ok(None);
    }
    let n = dimension_of(meta)? as u64;
    let b = Formula::StrassenSeq.evaluate(&BoundParams::new(n, cache as u64))?;
    Ok(Some(serde_json::to_value(b)?))
}

fn generate(g: &Cdag, strategy: Strategy, cache: usize) -> Result<Schedule> {
    let meta = g.meta();
    let n = dimension_of(meta)?;
    match strategy {
        Strategy::Blocked => {
            let build = rebuild_recursive(meta, n)?;
            if build.cdag != *g {
                bail!("graph differs from a fresh `{}` build with n={n}", meta.builder);
            }
            let opts = BlockedOptions::for_build(&build);
            Ok(generate_blocked_schedule_for(&build, cache, &opts)?)
        }
        Strategy::Naive => {
            if meta.builder != "naive" {
                bail!("the naive strategy needs a naive graph, got `{}`", meta.builder);
            }
            Ok(generate_naive_schedule_for(g, n, cache)?)
        }
    }
}

fn cmd_schedule(cli: &Cli, a: &ScheduleArgs) -> Result<Status> {
    let g = load_cdag(&a.cdag)?;
    let s = generate(&g, a.strategy, a.cache)?;
    let file = fs::File::create(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    let mut w = BufWriter::new(file);
    write_trace(&g, &s, &mut w)?;
    w.flush()?;
    match validate_schedule(&g, &s, a.cache, mode(a.no_recompute)) {
        Ok(stats) => {
            let v = json!({
                "config": cli,
                "moves": s.moves.len(),
                "stats": stats,
                "bound": strassen_bound(g.meta(), a.cache)?,
            });
            emit(a.stats.as_deref(), &v)?;
            Ok(Status::Pass)
        }
        Err(e) => {
            eprintln!("error: generated schedule rejected: {e}");
            Ok(Status::Violation)
        }
    }
}

fn cmd_simulate(cli: &Cli, a: &SimulateArgs) -> Result<Status> {
    let g = load_cdag(&a.cdag)?;
    let file = fs::File::open(&a.trace).with_context(|| format!("reading {}", a.trace.display()))?;
    let (s, lines) = read_trace_lines(&g, BufReader::new(file))
        .with_context(|| format!("parsing {}", a.trace.display()))?;
    let cache = a.cache.unwrap_or(s.declared_cache);
    match validate_schedule(&g, &s, cache, mode(a.no_recompute)) {
        Ok(stats) => {
            let v = json!({
                "config": cli,
                "cache": cache,
                "stats": stats,
                "bound": strassen_bound(g.meta(), cache)?,
            });
            emit(a.out.as_deref(), &v)?;
            Ok(Status::Pass)
        }
        Err(e) => {
            let at = match lines.get(e.index) {
                Some(l) => format!("line {l}"),
                None => "end of trace".to_string(),
            };
            eprintln!("error: {}: {at}: {}", a.trace.display(), e.kind);
            Ok(Status::Violation)
        }
    }
}

fn cmd_bound(cli: &Cli, a: &BoundArgs) -> Result<Status> {
    let params = BoundParams {
        n: a.n,
        cache: a.cache,
        procs: a.procs,
        n0: a.n0,
        m0: a.m0,
        q: a.q,
    };
    let b = a.formula.evaluate(&params)?;
    let value = match b.exact {
        Some(x) => json!(x),
        None => json!(b.value),
    };
    let v = json!({
        "config": cli,
        "formula_id": b.formula_id,
        "expression": a.formula.expression(),
        "params": params,
        "value": value,
        "exact": b.exact.is_some(),
        "regime": b.regime,
    });
    emit(a.out.as_deref(), &v)?;
    Ok(Status::Pass)
}

fn report_verdict(v: &LemmaVerdict) {
    println!("{}", v.summary());
    for s in &v.violations {
        eprintln!("violation: {s}");
    }
    eprintln!("runtime: {} ms", v.runtime_ms);
}

/// Verdict JSON without the wall-clock field.
fn verdict_json(v: &LemmaVerdict) -> Result<Value> {
    let mut j = serde_json::to_value(v)?;
    if let Some(o) = j.as_object_mut() {
        o.remove("runtime_ms");
    }
    Ok(j)
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Result<Status> {
    let mut verdicts = Vec::new();
    let mut extra = json!({});
    match &a.check {
        VerifyCheck::Table1 => {
            let t = verify_table1()?;
            println!("{}", t.summary());
            extra = json!({
                "rows_matched": t.rows_matched,
                "rows_total": t.rows_total,
                "sandwich_violations": t.sandwich_violations,
                "side_b_matches": t.side_b_matches,
            });
            verdicts.push(t.verdict);
        }
        VerifyCheck::CorollaryHalf { n, copies } => {
            if *copies == 0 {
                bail!("--copies must be at least 1");
            }
            let (g, _) = mmio_core::build_strassen(*n)?;
            let parts = vec![&g; *copies];
            let h = Cdag::disjoint_union(&parts, Meta::new("union", json!({ "n": n, "copies": copies })))?;
            verdicts.push(verify_corollary_half(&h)?);
        }
        VerifyCheck::Dominator2m {
            n,
            cache,
            samples,
            exhaustive_limit,
        } => {
            let opts = SweepOptions {
                exhaustive_limit: *exhaustive_limit,
                samples: *samples,
                seed: cli.seed,
            };
            verdicts.push(verify_dominator_2m(*n, *cache, &opts)?);
        }
        VerifyCheck::DisjointPaths { n, cache, samples } => {
            verdicts.push(verify_disjoint_paths(*n, *cache, *samples, cli.seed)?);
        }
        VerifyCheck::Families { n, level } => {
            let b = build_strassen_full(*n, BuildOptions::default())?;
            let levels: Vec<usize> = match level {
                Some(l) => vec![*l],
                None => (1..b.report.families.len()).collect(),
            };
            for l in levels {
                verdicts.push(verify_family_disjointness(&b.cdag, &b.report, l)?);
            }
        }
        VerifyCheck::Flow { n, p, x, y } => {
            verdicts.push(verify_empirical_flow(*n, *p, x, y)?);
        }
    }
    for v in &verdicts {
        report_verdict(v);
    }
    if let Some(out) = &a.out {
        let vs = verdicts.iter().map(verdict_json).collect::<Result<Vec<_>>>()?;
        emit(Some(out), &json!({ "config": cli, "verdicts": vs, "details": extra }))?;
    }
    Ok(Status::from_pass(verdicts.iter().all(LemmaVerdict::passed)))
}

fn cmd_report(cli: &Cli, a: &ReportArgs) -> Result<Status> {
    let checks = match a.suite {
        Suite::Desk => suite::desk(cli.seed)?,
    };
    let file = fs::File::create(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    suite::write_csv(&checks, BufWriter::new(file))?;
    for c in &checks {
        println!("{}", c.line());
    }
    let pass = checks.iter().all(suite::Check::passed);
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut run_log = a.out.clone().into_os_string();
    run_log.push(".run.json");
    let run = json!({
        "config": cli,
        "seeds": suite::Seeds::derive(cli.seed),
        "rows": checks.iter().map(|c| c.rows.len()).sum::<usize>(),
        "passed": pass,
        "timestamp": stamp,
    });
    emit(Some(Path::new(&run_log)), &run)?;
    Ok(Status::from_pass(pass))
}
