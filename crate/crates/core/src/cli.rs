//! Command-line front end: `solve`, `check`, `simulate` and `trace`.
//!
//! Exit codes: 0 success, 1 a check failed or the solver did not converge,
//! 2 usage error, 3 I/O error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::engine::{iterates, solve, Init, ModelKind, SolveOpts, SolveReport};
use crate::error::{Error, Result};
use crate::grid::{sample_ammo, GridSpec, Scaling, ValueField};
use crate::mc::{simulate_bomber, simulate_fighter, SimConfig};
use crate::model::AmmoFunction;
use crate::policy::{check_a, check_b, check_c, extract_policy};
use crate::props::{check_bounds, check_concave_in_x, check_logconcave_in_x, check_tp2, DEFAULT_TOL};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// Largest accepted `nx * nt`.
pub const MAX_NODES: usize = 4_000_000;

const TOOL: &str = env!("CARGO_PKG_NAME");
const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "bomber-dp", version, about = "Solve and verify the Bomber and Fighter allocation problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the value surface and write it as CSV.
    Solve(SolveArgs),
    /// Solve, then run the structural checks that apply to the model.
    Check(CheckArgs),
    /// Solve, extract the optimal policy and roll it out by Monte Carlo.
    Simulate(SimulateArgs),
    /// Export the first iterates from zero, with log-concavity verdicts.
    Trace(TraceArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// bomber | frail | invincible | fu:u=<p>
    #[arg(long, value_parser = parse_model, default_value = "bomber")]
    pub model: ModelKind,
    /// bomber:u=<p> | fighter | piecewise:knots=<y>:<a>,<y>:<a>,...
    #[arg(long, value_parser = parse_ammo, default_value = "bomber:u=0")]
    pub ammo: AmmoFunction,
    /// Domain and resolution as XMAXxTMAX:NXxNT
    #[arg(long, value_parser = parse_grid, default_value = "10x10:201x201")]
    pub grid: GridSpec,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = InitArg::Sandwich)]
    pub init: InitArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the artifacts
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InitArg {
    Zero,
    Bound,
    Sandwich,
}

impl From<InitArg> for Init {
    fn from(v: InitArg) -> Self {
        match v {
            InitArg::Zero => Init::Zero,
            InitArg::Bound => Init::Bound,
            InitArg::Sandwich => Init::Sandwich,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScalingArg {
    Raw,
    Rescaled,
    Both,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Which value CSVs to write
    #[arg(long, value_enum, default_value_t = ScalingArg::Raw)]
    pub scaling: ScalingArg,
    /// Also write the optimal policy CSV
    #[arg(long)]
    pub policy: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Tolerance for the structural checks
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub check_tol: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Initial stock, on an x-node
    #[arg(long)]
    pub x0: f64,
    /// Horizon, on a t-node
    #[arg(long)]
    pub t0: f64,
    #[arg(long, default_value_t = 100_000)]
    pub paths: u64,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Number of iterates exported at the final time
    #[arg(long, default_value_t = 10)]
    pub iterates: usize,
    /// Number of iterates exported as full surfaces
    #[arg(long, default_value_t = 7)]
    pub surfaces: usize,
}

/// `bomber`, `frail`/`f0`, `invincible`/`f1` or `fu:u=<p>`.
pub fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    let (name, params) = split_family(s);
    let kind = match name {
        "bomber" | "bo" => ModelKind::Bo,
        "frail" | "f0" => ModelKind::F0,
        "invincible" | "f1" => ModelKind::F1,
        "fu" => ModelKind::Fu {
            u: number(&params, "u", name)?,
        },
        _ => return Err(format!("unknown model '{name}'; expected bomber, frail, invincible or fu:u=<p>")),
    };
    expect_keys(&params, if name == "fu" { &["u"] } else { &[] }, name)?;
    kind.validate().map_err(|e| e.to_string())?;
    Ok(kind)
}

/// `bomber:u=<p>`, `fighter` or `piecewise:knots=<y>:<a>,<y>:<a>,...`.
pub fn parse_ammo(s: &str) -> std::result::Result<AmmoFunction, String> {
    let (name, params) = split_family(s);
    let f = match name {
        "bomber" => {
            expect_keys(&params, &["u"], name)?;
            AmmoFunction::canonical_bomber(number(&params, "u", name)?)
        }
        "fighter" => {
            expect_keys(&params, &[], name)?;
            Ok(AmmoFunction::canonical_fighter())
        }
        "piecewise" => {
            expect_keys(&params, &["knots"], name)?;
            let raw = lookup(&params, "knots", name)?;
            let knots = raw
                .split(',')
                .map(|pair| {
                    let (y, a) = pair
                        .split_once(':')
                        .ok_or_else(|| format!("knot '{pair}' is not <y>:<a>"))?;
                    Ok((parse_f64(y)?, parse_f64(a)?))
                })
                .collect::<std::result::Result<Vec<_>, String>>()?;
            AmmoFunction::piecewise_linear(knots)
        }
        _ => return Err(format!("unknown ammunition family '{name}'; expected bomber, fighter or piecewise")),
    };
    f.map_err(|e| e.to_string())
}

/// `XMAXxTMAX:NXxNT`, e.g. `10x10:201x201`.
pub fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let bad = || format!("grid '{s}' is not XMAXxTMAX:NXxNT");
    let (extent, nodes) = s.split_once(':').ok_or_else(bad)?;
    let (x, t) = extent.split_once('x').ok_or_else(bad)?;
    let (nx, nt) = nodes.split_once('x').ok_or_else(bad)?;
    let nx: usize = nx.trim().parse().map_err(|_| bad())?;
    let nt: usize = nt.trim().parse().map_err(|_| bad())?;
    if nx.saturating_mul(nt) > MAX_NODES {
        return Err(format!("grid has {nx} x {nt} nodes, above the limit of {MAX_NODES}"));
    }
    GridSpec::new(parse_f64(x)?, parse_f64(t)?, nx, nt).map_err(|e| e.to_string())
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.trim().parse().map_err(|_| format!("'{s}' is not a number"))
}

/// Splits `family:k=v,k=v` into the family and its key/value pairs. Comma
/// separated tokens without `=` continue the previous value.
fn split_family(s: &str) -> (&str, Vec<(String, String)>) {
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut params: Vec<(String, String)> = Vec::new();
    for tok in rest.split(',').filter(|t| !t.is_empty()) {
        match (tok.split_once('='), params.last_mut()) {
            (Some((k, v)), _) => params.push((k.trim().to_string(), v.to_string())),
            (None, Some((_, v))) => {
                v.push(',');
                v.push_str(tok);
            }
            (None, None) => params.push((tok.trim().to_string(), String::new())),
        }
    }
    (name.trim(), params)
}

fn expect_keys(params: &[(String, String)], allowed: &[&str], family: &str) -> std::result::Result<(), String> {
    for (k, _) in params {
        if !allowed.contains(&k.as_str()) {
            return Err(format!("'{family}' takes no parameter '{k}'"));
        }
    }
    Ok(())
}

fn lookup<'a>(params: &'a [(String, String)], key: &str, family: &str) -> std::result::Result<&'a str, String> {
    params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| format!("'{family}' needs {key}=<value>"))
}

fn number(params: &[(String, String)], key: &str, family: &str) -> std::result::Result<f64, String> {
    parse_f64(lookup(params, key, family)?)
}

/// Resolved configuration embedded in every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub model: ModelKind,
    pub ammo: AmmoFunction,
    pub grid: GridSpec,
    pub solve: SolveOpts,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Value>,
}

impl RunConfig {
    fn new(command: &'static str, p: &ProblemArgs) -> Result<Self> {
        let solve = SolveOpts {
            tol: p.tol,
            max_iter: p.max_iter,
            init: p.init.into(),
        };
        solve.validate()?;
        Ok(Self {
            command,
            model: p.model,
            ammo: p.ammo.clone(),
            grid: p.grid,
            solve,
            seed: p.seed,
            simulate: None,
            trace: None,
        })
    }

    fn envelope(&self, body: Value) -> Value {
        let mut v = json!({ "tool": TOOL, "version": VERSION, "config": self });
        if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
            dst.extend(src);
        }
        v
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, v)?;
        writeln!(w)
    })
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn solve_problem(cfg: &RunConfig) -> Result<(ValueField, SolveReport)> {
    solve(cfg.model, &cfg.ammo, &cfg.grid, &cfg.solve)
}

fn not_converged(report: &SolveReport) -> bool {
    if !report.converged {
        eprintln!(
            "solver stopped after {} iterations without reaching the tolerance",
            report.iterations
        );
    }
    !report.converged
}

fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    let cfg = RunConfig::new("solve", &args.problem)?;
    let out = &args.problem.out;
    prepare_out(out)?;
    let (q, report) = solve_problem(&cfg)?;
    let raw = q.rescale(Scaling::Raw);
    if args.scaling != ScalingArg::Rescaled {
        write_with(&out.join("value_raw.csv"), |w| raw.write_csv(w))?;
    }
    if args.scaling != ScalingArg::Raw {
        write_with(&out.join("value_rescaled.csv"), |w| q.write_csv(w))?;
    }
    if args.policy {
        let p = extract_policy(cfg.model, &cfg.ammo, &raw)?;
        write_with(&out.join("policy.csv"), |w| p.write_csv(w))?;
    }
    write_json(&out.join("report.json"), &cfg.envelope(json!({ "solve": report })))?;
    Ok(if not_converged(&report) { EXIT_FAILED } else { EXIT_OK })
}

#[derive(Serialize)]
struct CheckEntry {
    name: &'static str,
    /// Informational entries never fail the command.
    asserted: bool,
    holds: bool,
    report: Value,
}

fn entry<T: Serialize>(name: &'static str, asserted: bool, holds: bool, report: &T) -> Result<CheckEntry> {
    Ok(CheckEntry {
        name,
        asserted,
        holds,
        report: serde_json::to_value(report)?,
    })
}

/// Structural checks that apply to `kind`, each flagged as asserted or
/// informational.
fn check_suite(kind: ModelKind, f: &AmmoFunction, q: &ValueField, tol: f64) -> Result<Vec<CheckEntry>> {
    let raw = q.rescale(Scaling::Raw);
    let p = extract_policy(kind, f, &raw)?;
    let bounds = check_bounds(&raw, kind)?;
    let (a, b, c) = (check_a(&p), check_b(&p), check_c(&p));
    let mut out = vec![entry("bounds", true, bounds.holds, &bounds)?];
    match kind {
        ModelKind::Bo | ModelKind::F0 => {
            let tp2 = check_tp2(q, tol);
            let tp2_raw = check_tp2(&raw, tol);
            out.push(entry("tp2_rescaled", true, tp2.holds, &tp2)?);
            out.push(entry("tp2_raw", true, tp2_raw.holds, &tp2_raw)?);
            out.push(entry("policy_a", true, a.holds, &a)?);
            out.push(entry("policy_c", true, c.holds, &c)?);
            out.push(entry("policy_b", false, b.holds, &b)?);
        }
        ModelKind::F1 => {
            let conc = check_concave_in_x(&raw, tol);
            out.push(entry("concave_in_x", true, conc.holds, &conc)?);
            out.push(entry("policy_b", true, b.holds, &b)?);
            out.push(entry("policy_c", true, c.holds, &c)?);
            out.push(entry("policy_a", false, a.holds, &a)?);
        }
        ModelKind::Fu { .. } => {
            let tp2 = check_tp2(q, tol);
            out.push(entry("tp2_rescaled", false, tp2.holds, &tp2)?);
            out.push(entry("policy_a", false, a.holds, &a)?);
            out.push(entry("policy_b", false, b.holds, &b)?);
            out.push(entry("policy_c", false, c.holds, &c)?);
        }
    }
    Ok(out)
}

fn cmd_check(args: &CheckArgs) -> Result<u8> {
    let cfg = RunConfig::new("check", &args.problem)?;
    let out = &args.problem.out;
    prepare_out(out)?;
    let (q, report) = solve_problem(&cfg)?;
    let entries = check_suite(cfg.model, &cfg.ammo, &q, args.check_tol)?;
    let failed: Vec<&str> = entries
        .iter()
        .filter(|e| e.asserted && !e.holds)
        .map(|e| e.name)
        .collect();
    for e in &entries {
        let verdict = if e.holds { "pass" } else { "fail" };
        let tag = if e.asserted { "" } else { " (informational)" };
        println!("{:<14} {verdict}{tag}", e.name);
    }
    let passed = failed.is_empty() && report.converged;
    let body = json!({ "solve": report, "checks": entries, "passed": passed });
    write_json(&out.join("check.json"), &cfg.envelope(body))?;
    if !failed.is_empty() {
        eprintln!("failed checks: {}", failed.join(", "));
    }
    Ok(if not_converged(&report) || !failed.is_empty() { EXIT_FAILED } else { EXIT_OK })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<u8> {
    let mut cfg = RunConfig::new("simulate", &args.problem)?;
    let sim = SimConfig {
        n_paths: args.paths,
        seed: args.problem.seed,
        x0: args.x0,
        t0: args.t0,
    };
    cfg.simulate = Some(sim);
    let out = &args.problem.out;
    prepare_out(out)?;
    let (q, report) = solve_problem(&cfg)?;
    let raw = q.rescale(Scaling::Raw);
    let p = extract_policy(cfg.model, &cfg.ammo, &raw)?;
    let result = match cfg.model.fighter_u() {
        None => simulate_bomber(&cfg.ammo, &p, &sim)?,
        Some(u) => simulate_fighter(&cfg.ammo, u, &p, &sim)?,
    };
    let spec = cfg.grid;
    let dp = match (spec.x_node(sim.x0), spec.t_node(sim.t0)) {
        (Some(i), Some(j)) => raw.get(i, j),
        _ => unreachable!("start node validated by the simulator"),
    };
    println!(
        "estimate {:.6} +/- {:.6} (dp value {:.6})",
        result.estimate, result.std_err, dp
    );
    let body = json!({ "result": result, "dp_value": dp, "solve": report });
    write_json(&out.join("simulate.json"), &cfg.envelope(body))?;
    Ok(if not_converged(&report) { EXIT_FAILED } else { EXIT_OK })
}

/// One iterate of `G` from zero, summarised.
#[derive(Clone, Debug, Serialize)]
pub struct IterateSummary {
    pub m: usize,
    /// Sup-distance to the previous iterate (to zero for `m = 1`).
    pub sup_delta: f64,
    pub logconcave_in_x: bool,
    pub worst_margin: f64,
}

fn cmd_trace(args: &TraceArgs) -> Result<u8> {
    if args.iterates == 0 {
        return Err(Error::Config("--iterates must be at least 1".into()));
    }
    let mut cfg = RunConfig::new("trace", &args.problem)?;
    cfg.trace = Some(json!({ "iterates": args.iterates, "surfaces": args.surfaces }));
    let out = &args.problem.out;
    prepare_out(out)?;
    let spec = cfg.grid;
    let a = sample_ammo(&cfg.ammo, &spec);
    let zero = ValueField::constant(spec, Scaling::ExpRescaled, 0.0)?;
    let last = spec.nt() - 1;

    let mut fixed = create(&out.join("trace_fixed_t.csv"))?;
    let mut surf = create(&out.join("trace_surfaces.csv"))?;
    let io = |path: &str| {
        let path = out.join(path);
        move |source| Error::Io { path, source }
    };
    writeln!(fixed, "m,x,t,log_value").map_err(io("trace_fixed_t.csv"))?;
    writeln!(surf, "m,x,t,log_value").map_err(io("trace_surfaces.csv"))?;

    let mut summary = Vec::with_capacity(args.iterates);
    let mut prev = zero.clone();
    for (m, q) in (1..=args.iterates).zip(iterates(cfg.model, &a, zero)?) {
        for i in 0..spec.nx() {
            writeln!(fixed, "{m},{:.16e},{:.16e},{:.16e}", spec.x(i), spec.t(last), q.get(i, last).ln())
                .map_err(io("trace_fixed_t.csv"))?;
        }
        if m <= args.surfaces {
            for i in 0..spec.nx() {
                for j in 0..spec.nt() {
                    writeln!(surf, "{m},{:.16e},{:.16e},{:.16e}", spec.x(i), spec.t(j), q.get(i, j).ln())
                        .map_err(io("trace_surfaces.csv"))?;
                }
            }
        }
        let lc = check_logconcave_in_x(&q, DEFAULT_TOL);
        summary.push(IterateSummary {
            m,
            sup_delta: q.sup_distance(&prev)?,
            logconcave_in_x: lc.holds,
            worst_margin: lc.worst,
        });
        prev = q;
    }
    fixed.flush().map_err(io("trace_fixed_t.csv"))?;
    surf.flush().map_err(io("trace_surfaces.csv"))?;

    write_with(&out.join("trace_summary.csv"), |w| {
        writeln!(w, "m,sup_delta,logconcave_in_x,worst_margin")?;
        for s in &summary {
            let verdict = if s.logconcave_in_x { "pass" } else { "fail" };
            writeln!(w, "{},{:.16e},{verdict},{:.16e}", s.m, s.sup_delta, s.worst_margin)?;
        }
        Ok(())
    })?;
    write_json(&out.join("trace_report.json"), &cfg.envelope(json!({ "iterates": summary })))?;
    Ok(EXIT_OK)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Json(_) => EXIT_IO,
        Error::SandwichOrder { .. } => EXIT_FAILED,
        _ => EXIT_USAGE,
    }
}

struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, metadata: &log::Metadata<'_>) -> bool {
        metadata.level() <= log::Level::Warn
    }

    fn log(&self, record: &log::Record<'_>) {
        if self.enabled(record.metadata()) {
            eprintln!("{}: {}", record.level().as_str().to_lowercase(), record.args());
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLogger = StderrLogger;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(log::LevelFilter::Warn);
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Check(a) => cmd_check(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Trace(a) => cmd_trace(a),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AmmoFamily;

    #[test]
    fn models() {
        assert_eq!(parse_model("bomber").unwrap(), ModelKind::Bo);
        assert_eq!(parse_model("frail").unwrap(), ModelKind::F0);
        assert_eq!(parse_model("f1").unwrap(), ModelKind::F1);
        assert_eq!(parse_model("fu:u=0.25").unwrap(), ModelKind::Fu { u: 0.25 });
        assert!(parse_model("fu:u=2").is_err());
        assert!(parse_model("fu").is_err());
        assert!(parse_model("bomber:u=0.3").is_err());
        assert!(parse_model("tank").is_err());
    }

    #[test]
    fn ammo() {
        let f = parse_ammo("bomber:u=0.3").unwrap();
        assert_eq!(f.family(), &AmmoFamily::CanonicalBomber { u: 0.3 });
        assert!(parse_ammo("bomber:u=1.5").is_err());
        assert!(parse_ammo("bomber").is_err());
        assert!(parse_ammo("bomber:v=0.1").is_err());
        assert_eq!(parse_ammo("fighter").unwrap(), AmmoFunction::canonical_fighter());
        let p = parse_ammo("piecewise:knots=0:0.1,1:0.9,2:0.95").unwrap();
        assert_eq!(
            p.family(),
            &AmmoFamily::PiecewiseLinear {
                knots: vec![(0.0, 0.1), (1.0, 0.9), (2.0, 0.95)]
            }
        );
        assert!(parse_ammo("piecewise:knots=0:0.5,1:0.2").is_err());
        assert!(parse_ammo("piecewise:knots=0").is_err());
    }

    #[test]
    fn grids() {
        let g = parse_grid("10x5:201x101").unwrap();
        assert_eq!((g.x_max(), g.t_max(), g.nx(), g.nt()), (10.0, 5.0, 201, 101));
        assert!(parse_grid("10x10").is_err());
        assert!(parse_grid("10x10:1x5").is_err());
        assert!(parse_grid("10x10:4001x1001").is_err());
        assert!(parse_grid("-1x10:5x5").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["bomber-dp", "solve", "--ammo", "bomber:u=1.5"]), EXIT_USAGE);
        assert_eq!(run(["bomber-dp", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["bomber-dp", "solve", "--tol=-1", "--grid", "1x1:3x3"]), EXIT_USAGE);
    }

    #[test]
    fn unwritable_output_exits_three() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let out = blocker.join("sub");
        let code = run([
            "bomber-dp",
            "solve",
            "--grid",
            "1x1:5x5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_IO);
    }

    #[test]
    fn config_embeds_version() {
        let cli = Cli::try_parse_from(["bomber-dp", "solve", "--grid", "1x1:3x3"]).unwrap();
        let Command::Solve(a) = cli.command else { panic!() };
        let cfg = RunConfig::new("solve", &a.problem).unwrap();
        let v = cfg.envelope(json!({ "x": 1 }));
        assert_eq!(v["version"], VERSION);
        assert_eq!(v["config"]["grid"]["nx"], 3);
        assert_eq!(v["x"], 1);
    }
}
