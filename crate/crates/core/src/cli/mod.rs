//! `frameforge` command-line interface.
//!
//! Exit codes are stable: 0 success, 1 usage error, 2 inadmissible or
//! invalid spec, 3 non-convergence, 4 I/O or parse failure, 5 combinatorial
//! budget exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::admissibility::check_admissible;
use crate::energy::{energy, residuals};
use crate::error::FrameError;
use crate::flow::{descend, random_full_spark_init, FlowConfig, FlowReport, Outcome};
use crate::frame::{Field, FrameMatrix};
use crate::io::{read_frame, read_spec, trace_to_csv, write_frame, RunManifest};
use crate::spec::{NormSpec, Tolerances};
use crate::stability::{check_property_s, classify_critical_point, is_full_spark, CriticalKind};
use crate::topology::{
    best_ansatz_constant, certify_connectivity, certify_neighborhood_connectivity, codimension_bound,
    min_n_for_q_connected,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INADMISSIBLE: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;

/// Environment variable capping the sweep worker count.
pub const THREADS_ENV: &str = "FRAMEFORGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "frameforge", version, about = "Parseval frames with prescribed norms")]
pub struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Gradient-norm termination threshold
    #[arg(long, global = true)]
    tol_grad: Option<f64>,
    /// Parseval / norm residual acceptance threshold
    #[arg(long, global = true)]
    tol_residual: Option<f64>,
    /// Relative singular-value cutoff for numerical rank
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Compact machine-readable output
    #[arg(long, global = true)]
    json: bool,
    /// Where to write the run manifest
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
}

impl GlobalOpts {
    fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.tol_grad {
            t.grad_tol = v;
        }
        if let Some(v) = self.tol_residual {
            t.residual_tol = v;
        }
        if let Some(v) = self.tol_rank {
            t.rank_tol = v;
        }
        t
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a frame in PF_d(r) from a seeded Gaussian start
    Synth(SynthArgs),
    /// Run the flow over a range of seeds for one or more specs
    Sweep(SweepArgs),
    /// Admissibility verdict, plus frame checks when --frame is given
    Check(CheckArgs),
    /// Total frame energy breakdown
    Energy(FrameSpecArgs),
    /// Critical-point classification
    Classify(FrameSpecArgs),
    /// Ansatz constant, codimension bounds and connectivity certificates
    Topology(TopologyArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "real")]
    field: Field,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_iters: Option<usize>,
    /// CSV trace with columns iteration, energy, grad_norm
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Norm spec files (repeatable)
    #[arg(long, required = true, num_args = 1..)]
    spec: Vec<PathBuf>,
    #[arg(long, default_value = "real")]
    field: Field,
    #[arg(long, default_value_t = 0)]
    seed_start: u64,
    /// Number of seeds; 0 gives an empty table
    #[arg(long, default_value_t = 25)]
    seeds: u64,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Output CSV table
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    frame: Option<PathBuf>,
    #[arg(long)]
    spark: bool,
    #[arg(long)]
    stability: bool,
    #[arg(long)]
    classify: bool,
}

#[derive(Debug, Args)]
struct FrameSpecArgs {
    #[arg(long)]
    frame: PathBuf,
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Debug, Args)]
struct TopologyArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value = "real")]
    field: Field,
    #[arg(long, default_value_t = 0)]
    q: usize,
    /// Also tabulate equal-norm certificates for n = d..=MAX
    #[arg(long)]
    scan_n: Option<usize>,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<FrameError> for Failure {
    fn from(e: FrameError) -> Self {
        let code = match &e {
            FrameError::InadmissibleSpec(_) | FrameError::InvalidSpec(_) => EXIT_INADMISSIBLE,
            FrameError::NonFiniteEncountered { .. } => EXIT_NON_CONVERGENCE,
            FrameError::Io(_) | FrameError::Parse(_) => EXIT_IO,
            FrameError::CombinatorialBudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_IO, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

struct Ctx<'a> {
    global: &'a GlobalOpts,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit<T: Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        let text = if self.global.json {
            serde_json::to_string(value)
        } else {
            serde_json::to_string_pretty(value)
        }
        .expect("report serialization");
        writeln!(self.out, "{text}")?;
        Ok(())
    }

    fn manifest(&self, command: &str, spec_hash: &str, seed: u64, config: FlowConfig, outcome: String) -> Result<(), Failure> {
        if let Some(path) = &self.global.manifest {
            RunManifest::new(command, spec_hash, seed, config, outcome).write(path)?;
        }
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let mut ctx = Ctx { global: &cli.global, out };
    let result = match &cli.command {
        Command::Synth(a) => cmd_synth(&mut ctx, a, err),
        Command::Sweep(a) => cmd_sweep(&mut ctx, a, err),
        Command::Check(a) => cmd_check(&mut ctx, a),
        Command::Energy(a) => cmd_energy(&mut ctx, a),
        Command::Classify(a) => cmd_classify(&mut ctx, a),
        Command::Topology(a) => cmd_topology(&mut ctx, a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn flow_config(global: &GlobalOpts, max_iters: Option<usize>) -> FlowConfig {
    let mut cfg = FlowConfig { tolerances: global.tolerances(), ..FlowConfig::default() };
    if let Some(m) = max_iters {
        cfg.max_iters = m;
    }
    cfg
}

#[derive(Serialize)]
struct SynthSummary<'a> {
    #[serde(flatten)]
    report: &'a FlowReport,
    seed: u64,
    out: String,
}

fn cmd_synth(ctx: &mut Ctx, a: &SynthArgs, err: &mut dyn Write) -> Result<i32, Failure> {
    let (spec, hash) = read_spec(&a.spec)?;
    if spec.d() != a.d || spec.n() != a.n {
        return Err(usage(format!(
            "--d {} --n {} disagree with the spec (d = {}, n = {})",
            a.d,
            a.n,
            spec.d(),
            spec.n()
        )));
    }
    let verdict = check_admissible(&spec);
    if !verdict.admissible {
        return Err(Failure { code: EXIT_INADMISSIBLE, message: format!("inadmissible spec: {}", verdict.explain(spec.d())) });
    }
    let cfg = flow_config(ctx.global, a.max_iters);
    let start = random_full_spark_init(a.d, a.n, a.field, a.seed)?;
    let report = descend(&start, &spec, &cfg)?;

    write_frame(&a.out, &report.terminal)?;
    if let Some(path) = &a.trace {
        std::fs::write(path, trace_to_csv(&report.trace))?;
    }
    let manifest_path = ctx.global.manifest.clone().unwrap_or_else(|| sibling(&a.out, "manifest.json"));
    RunManifest::new("synth", &hash, a.seed, cfg, summarize(&report)).write(&manifest_path)?;

    if ctx.global.json {
        ctx.emit(&SynthSummary { report: &report, seed: a.seed, out: a.out.display().to_string() })?;
    } else {
        writeln!(ctx.out, "{}", summarize(&report))?;
        writeln!(ctx.out, "wrote {}", a.out.display())?;
    }
    if report.outcome == Outcome::ConvergedToPF {
        Ok(EXIT_OK)
    } else {
        writeln!(err, "flow did not reach PF_d(r): {}", report.outcome)?;
        Ok(EXIT_NON_CONVERGENCE)
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

fn summarize(report: &FlowReport) -> String {
    format!(
        "{} after {} iterations: energy {:e}, grad {:e}, parseval residual {:e}, norm residual {:e}",
        report.outcome,
        report.iterations,
        report.terminal_energy,
        report.terminal_grad_norm,
        report.parseval_residual,
        report.norm_residual
    )
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    spec_hash: String,
    spec_file: String,
    seed: u64,
    outcome: String,
    iterations: Option<usize>,
    parseval_residual: Option<f64>,
    norm_residual: Option<f64>,
}

fn sweep_threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&t| t > 0)
}

fn cmd_sweep(ctx: &mut Ctx, a: &SweepArgs, _err: &mut dyn Write) -> Result<i32, Failure> {
    let specs = a
        .spec
        .iter()
        .map(|p| read_spec(p).map(|(s, h)| (p.display().to_string(), s, h)))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = flow_config(ctx.global, a.max_iters);
    let seeds: Vec<u64> = (a.seed_start..a.seed_start.saturating_add(a.seeds)).collect();
    let jobs: Vec<(usize, u64)> = (0..specs.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();

    let run_one = |&(i, seed): &(usize, u64)| -> SweepRow {
        let (file, spec, hash) = &specs[i];
        let mut row = SweepRow {
            spec_hash: hash.clone(),
            spec_file: file.clone(),
            seed,
            outcome: String::new(),
            iterations: None,
            parseval_residual: None,
            norm_residual: None,
        };
        if !check_admissible(spec).admissible {
            row.outcome = "REJECTED".into();
            return row;
        }
        match random_full_spark_init(spec.d(), spec.n(), a.field, seed).and_then(|f| descend(&f, spec, &cfg)) {
            Ok(rep) => {
                row.outcome = rep.outcome.to_string();
                row.iterations = Some(rep.iterations);
                row.parseval_residual = Some(rep.parseval_residual);
                row.norm_residual = Some(rep.norm_residual);
            }
            Err(e) => row.outcome = format!("ERROR: {e}"),
        }
        row
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = sweep_threads() {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| usage(e.to_string()))?;
    // par_iter + collect keeps (spec, seed) order
    let rows: Vec<SweepRow> = pool.install(|| jobs.par_iter().map(run_one).collect());

    let mut writer = csv::Writer::from_path(&a.out).map_err(|e| Failure { code: EXIT_IO, message: e.to_string() })?;
    for row in &rows {
        writer.serialize(row).map_err(|e| Failure { code: EXIT_IO, message: e.to_string() })?;
    }
    writer.flush()?;

    let ran = rows.iter().filter(|r| r.outcome != "REJECTED").count();
    let ok = rows.iter().filter(|r| r.outcome == Outcome::ConvergedToPF.to_string()).count();
    let ratio = if ran == 0 { 1.0 } else { ok as f64 / ran as f64 };
    let rejected = rows.len() - ran;
    if ctx.global.json {
        ctx.emit(&json!({"runs": ran, "converged": ok, "rejected": rejected, "success_ratio": ratio, "out": a.out.display().to_string()}))?;
    } else {
        writeln!(ctx.out, "success ratio {ok}/{ran} = {ratio}")?;
        if rejected > 0 {
            writeln!(ctx.out, "{rejected} rows rejected (inadmissible spec)")?;
        }
    }
    let hash = specs.first().map(|s| s.2.clone()).unwrap_or_default();
    ctx.manifest("sweep", &hash, a.seed_start, cfg, format!("{ok}/{ran} converged"))?;
    Ok(EXIT_OK)
}

fn load_pair(frame: &Path, spec: &Path) -> Result<(FrameMatrix, NormSpec, String), Failure> {
    let f = read_frame(frame)?;
    let (s, h) = read_spec(spec)?;
    if f.n() != s.n() || f.d() != s.d() {
        return Err(usage(format!("frame is {}x{} but the spec has d = {}, n = {}", f.d(), f.n(), s.d(), s.n())));
    }
    Ok((f, s, h))
}

fn membership(frame: &FrameMatrix, spec: &NormSpec, tol: &Tolerances) -> Value {
    let (p, m) = residuals(frame, &spec.r_f64());
    json!({
        "in_pf": p < tol.residual_tol && m < tol.residual_tol,
        "parseval_residual": p,
        "norm_residual": m,
    })
}

fn cmd_check(ctx: &mut Ctx, a: &CheckArgs) -> Result<i32, Failure> {
    let tol = ctx.global.tolerances();
    tol.validate()?;
    let (spec, hash) = read_spec(&a.spec)?;
    let verdict = check_admissible(&spec);
    let mut report = serde_json::Map::new();
    report.insert("admissibility".into(), serde_json::to_value(&verdict).expect("verdict"));
    if !verdict.admissible {
        report.insert("reason".into(), Value::String(verdict.explain(spec.d())));
    }

    if let Some(frame_path) = &a.frame {
        let (frame, spec, _) = load_pair(frame_path, &a.spec)?;
        let all = !(a.spark || a.stability || a.classify);
        report.insert("membership".into(), membership(&frame, &spec, &tol));
        if all || a.spark {
            report.insert("spark".into(), serde_json::to_value(is_full_spark(&frame, &tol)?).expect("spark"));
        }
        if all || a.stability {
            report.insert("stability".into(), serde_json::to_value(check_property_s(&frame, &spec, &tol)?).expect("stability"));
        }
        if all || a.classify {
            report.insert("classification".into(), serde_json::to_value(classify_critical_point(&frame, &spec, &tol)?).expect("class"));
        }
    }
    ctx.emit(&Value::Object(report))?;
    ctx.manifest("check", &hash, 0, flow_config(ctx.global, None), format!("admissible = {}", verdict.admissible))?;
    Ok(if verdict.admissible { EXIT_OK } else { EXIT_INADMISSIBLE })
}

fn cmd_energy(ctx: &mut Ctx, a: &FrameSpecArgs) -> Result<i32, Failure> {
    let (frame, spec, hash) = load_pair(&a.frame, &a.spec)?;
    let e = energy(&frame, &spec)?;
    ctx.emit(&e)?;
    ctx.manifest("energy", &hash, 0, flow_config(ctx.global, None), format!("total = {:e}", e.total))?;
    Ok(EXIT_OK)
}

fn cmd_classify(ctx: &mut Ctx, a: &FrameSpecArgs) -> Result<i32, Failure> {
    let tol = ctx.global.tolerances();
    tol.validate()?;
    let (frame, spec, hash) = load_pair(&a.frame, &a.spec)?;
    let class = classify_critical_point(&frame, &spec, &tol)?;
    let mut report = serde_json::to_value(&class).expect("class");
    if matches!(class.kind, CriticalKind::BlockwiseTight | CriticalKind::WithZeroColumns) {
        let stab = check_property_s(&frame, &spec, &tol)?;
        report["stability_cross_check"] = serde_json::to_value(&stab).expect("stability");
    }
    ctx.emit(&report)?;
    ctx.manifest("classify", &hash, 0, flow_config(ctx.global, None), format!("{:?}", class.kind))?;
    Ok(EXIT_OK)
}

fn cmd_topology(ctx: &mut Ctx, a: &TopologyArgs) -> Result<i32, Failure> {
    let (spec, hash) = read_spec(&a.spec)?;
    let verdict = check_admissible(&spec);
    if !verdict.admissible {
        return Err(Failure { code: EXIT_INADMISSIBLE, message: format!("inadmissible spec: {}", verdict.explain(spec.d())) });
    }
    let mut report = serde_json::Map::new();
    report.insert("d".into(), json!(spec.d()));
    report.insert("n".into(), json!(spec.n()));
    report.insert("field".into(), json!(a.field));
    report.insert("q".into(), json!(a.q));
    report.insert("certificate".into(), serde_json::to_value(certify_connectivity(&spec, a.field, a.q)?).expect("cert"));
    if spec.d() >= 2 {
        report.insert("ansatz".into(), serde_json::to_value(best_ansatz_constant(&spec)?).expect("ansatz"));
        report.insert(
            "codimension_bound".into(),
            json!({
                "real": crate::spec::format_rational(&codimension_bound(&spec, Field::Real)?),
                "complex": crate::spec::format_rational(&codimension_bound(&spec, Field::Complex)?),
            }),
        );
        report.insert(
            "neighborhood".into(),
            serde_json::to_value(certify_neighborhood_connectivity(&spec)?).expect("neighborhood"),
        );
    }
    match min_n_for_q_connected(spec.d(), a.field, a.q) {
        Ok(n) => report.insert("min_n_equal_norm".into(), json!(n)),
        Err(e) => report.insert("min_n_equal_norm".into(), json!({"unavailable": e.to_string()})),
    };
    if let Some(max) = a.scan_n {
        let mut rows = Vec::new();
        for n in spec.d()..=max {
            let eq = NormSpec::equal_norm(spec.d(), n)?;
            let cert = certify_connectivity(&eq, a.field, a.q)?;
            rows.push(json!({
                "n": n,
                "certified": cert.certified,
                "c_used": crate::spec::format_rational(&cert.c_used),
                "condition_c": crate::spec::format_rational(&cert.condition_c),
            }));
        }
        report.insert("scan".into(), Value::Array(rows));
    }
    ctx.emit(&Value::Object(report))?;
    ctx.manifest("topology", &hash, 0, flow_config(ctx.global, None), format!("field {} q {}", a.field, a.q))?;
    Ok(EXIT_OK)
}
