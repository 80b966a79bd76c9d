//! Command-line front end.
//!
//! Every output starts with a header carrying the tool version, the
//! subcommand, the raw flags and the seed. CSV files carry it as a `# `
//! comment line holding a JSON object; JSON files carry it under the
//! `header` key. Exit codes: 0 success, 1 failed verification or I/O error,
//! 2 usage or configuration error, 3 violation witness found.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::distill::ReproBundle;
use crate::error::{Error, Result};
use crate::iterate::{certify_iterate, certify_power, iterate_werner, CertifyConfig, Certification};
use crate::multivar::{hessian_spectrum_sweep, nonconvexity_demo};
use crate::optimize::{minimize_q, SearchConfig, SearchReport};
use crate::states::{beta_bound, bound_polynomial, WernerParams, BETA_BOUND_TOL};
use crate::verify::{check_report, rank2_sample, run_suite, Check, VerifyScale};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const THREADS_ENV: &str = "DISTILL_LAB_THREADS";
/// Values below `-VIOLATION_TOL` count as violations.
pub const VIOLATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    }
    .map_err(|e| format!("invalid seed '{s}': {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "distill-lab", version, about = "Werner-state distillability laboratory")]
pub struct Cli {
    /// Worker threads for restarts and samples; DISTILL_LAB_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed, decimal or 0x-prefixed hex.
    #[arg(long, global = true, default_value = "0xD157", value_parser = parse_seed)]
    seed: u64,
    /// Directory for reproduction bundles (default: current directory).
    #[arg(long, global = true)]
    bundle_dir: Option<PathBuf>,
    /// Record wall-clock time in reports (otherwise written as 0).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Table of the dimension-free bound for N = 1..=n copies.
    Bound {
        #[arg(long, default_value_t = 10)]
        n: u32,
        #[arg(long, default_value_t = BETA_BOUND_TOL)]
        tol: f64,
    },
    /// Minimize the functional over unit-norm rank-two matrices.
    Minimize {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-9)]
        grad_tol: f64,
    },
    /// Minimize over a grid of beta values.
    Sweep {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Comma-separated beta values in [-1, 0].
        #[arg(long, allow_negative_numbers = true, value_delimiter = ',')]
        beta_grid: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
    },
    /// Run invariant suites, or re-check a saved report with `--suite report`.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Minimum Hessian eigenvalue at random critical points.
    Hessian {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
        beta: f64,
    },
    /// Certify one-copy undistillability of the k-th exchange iterate.
    Iterate {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: u32,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 12)]
        restarts: usize,
    },
    /// Gradients at two minima and at their midpoint.
    DemoNonconvexity {
        #[arg(long, default_value_t = 3)]
        d: usize,
    },
    /// Sample the two-copy rank-two inequality on random instances.
    Rank2 {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
        beta: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bound { .. } => "bound",
            Command::Minimize { .. } => "minimize",
            Command::Sweep { .. } => "sweep",
            Command::Verify { .. } => "verify",
            Command::Hessian { .. } => "hessian",
            Command::Iterate { .. } => "iterate",
            Command::DemoNonconvexity { .. } => "demo-nonconvexity",
            Command::Rank2 { .. } => "rank2",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Bound { .. } | Command::Sweep { .. } | Command::Hessian { .. } | Command::Rank2 { .. } => {
                Format::Csv
            }
            _ => Format::Json,
        }
    }
}

/// Provenance line written at the top of every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputHeader {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub flags: Vec<String>,
    pub seed: u64,
}

struct Context {
    header: OutputHeader,
    format: Format,
    out: Option<PathBuf>,
    seed: u64,
    bundle_dir: PathBuf,
    timing: bool,
}

impl Context {
    fn csv_header(&self) -> String {
        format!("# {}\n", serde_json::to_string(&self.header).expect("header serializes"))
    }

    fn emit(&self, body: &str) -> Result<()> {
        match &self.out {
            Some(p) => {
                if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent)?;
                }
                fs::write(p, body)?;
            }
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(body.as_bytes())?;
                so.flush()?;
            }
        }
        Ok(())
    }

    fn emit_json<T: Serialize>(&self, key: &str, value: &T, extra: Vec<(&str, serde_json::Value)>) -> Result<()> {
        let mut obj = serde_json::Map::new();
        obj.insert("header".into(), serde_json::to_value(&self.header)?);
        obj.insert(key.into(), serde_json::to_value(value)?);
        for (k, v) in extra {
            obj.insert(k.into(), v);
        }
        let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(obj))?;
        s.push('\n');
        self.emit(&s)
    }

    fn write_bundle(&self, b: &ReproBundle, index: usize) -> Result<PathBuf> {
        let p = b.write_to_dir(&self.bundle_dir, index)?;
        eprintln!("witness bundle: {}", p.display());
        Ok(p)
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                eprintln!("error: {THREADS_ENV}={v:?} is not a positive integer");
                return EXIT_USAGE;
            }
        },
        Err(_) => cli.threads,
    };
    let flags = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let ctx = Context {
        header: OutputHeader {
            tool: "distill-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: cli.command.name().into(),
            flags,
            seed: cli.seed,
        },
        format: cli.format.unwrap_or_else(|| cli.command.default_format()),
        out: cli.out.clone(),
        seed: cli.seed,
        bundle_dir: cli.bundle_dir.clone().unwrap_or_else(|| PathBuf::from(".")),
        timing: cli.timing,
    };
    let result = match threads {
        Some(0) => Err(Error::Argument("--threads must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, &ctx)),
            Err(e) => Err(Error::Argument(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli.command, &ctx),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Json(_) => EXIT_FAILED,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn dispatch(cmd: &Command, ctx: &Context) -> Result<i32> {
    match cmd {
        Command::Bound { n, tol } => cmd_bound(ctx, *n, *tol),
        Command::Minimize {
            d,
            n,
            beta,
            restarts,
            max_iters,
            grad_tol,
        } => {
            let cfg = SearchConfig {
                d: *d,
                n: *n,
                beta: *beta,
                restarts: *restarts,
                max_iters: *max_iters,
                grad_tol: *grad_tol,
                seed: ctx.seed,
            };
            cmd_minimize(ctx, &cfg)
        }
        Command::Sweep {
            d,
            n,
            beta_grid,
            restarts,
        } => cmd_sweep(ctx, *d, *n, beta_grid, *restarts),
        Command::Verify { suite, input } => cmd_verify(ctx, suite, input.as_deref()),
        Command::Hessian { d, samples, beta } => cmd_hessian(ctx, *d, *samples, *beta),
        Command::Iterate { d, k, beta, restarts } => cmd_iterate(ctx, *d, *k, *beta, *restarts),
        Command::DemoNonconvexity { d } => cmd_demo(ctx, *d),
        Command::Rank2 { d, samples, beta } => cmd_rank2(ctx, *d, *samples, *beta),
    }
}

#[derive(Serialize)]
struct BoundRow {
    n: u32,
    beta0: f64,
    residual: f64,
}

fn cmd_bound(ctx: &Context, n: u32, tol: f64) -> Result<i32> {
    if !(1..=64).contains(&n) {
        return Err(Error::Argument(format!("--n {n} outside 1..=64")));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument("--tol must be positive".into()));
    }
    let rows: Vec<BoundRow> = (1..=n)
        .map(|k| {
            let b = beta_bound(k, tol);
            BoundRow {
                n: k,
                beta0: b,
                residual: bound_polynomial(k, b).abs(),
            }
        })
        .collect();
    match ctx.format {
        Format::Json => ctx.emit_json("rows", &rows, vec![])?,
        Format::Csv => {
            let mut s = ctx.csv_header();
            s.push_str("n,beta0,residual\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{}", r.n, float(r.beta0), float(r.residual));
            }
            ctx.emit(&s)?;
        }
    }
    Ok(EXIT_OK)
}

fn report_bundle(r: &SearchReport) -> ReproBundle {
    let c = &r.config;
    let p = &r.best_point;
    ReproBundle::new("q-violation", c.d, c.n, c.beta, c.seed, r.best_value)
        .with_scalar("restart", r.best_restart as f64)
        .with_scalar("sigma1", p.sigma1())
        .with_scalar("sigma2", p.sigma2())
        .with_vector("u1", p.u1().to_vec())
        .with_vector("v1", p.v1().to_vec())
        .with_vector("u2", p.u2().to_vec())
        .with_vector("v2", p.v2().to_vec())
}

fn search(ctx: &Context, cfg: &SearchConfig) -> Result<SearchReport> {
    let mut r = minimize_q(cfg)?;
    if !ctx.timing {
        r.wall_time_s = 0.0;
    }
    Ok(r)
}

fn cmd_minimize(ctx: &Context, cfg: &SearchConfig) -> Result<i32> {
    let r = search(ctx, cfg)?;
    match ctx.format {
        Format::Json => ctx.emit_json("report", &r, vec![])?,
        Format::Csv => {
            let mut s = ctx.csv_header();
            s.push_str("restart,seed,final_value,iterations,grad_norm\n");
            for (i, p) in r.per_restart.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{i},{},{},{},{}",
                    p.seed,
                    float(p.final_value),
                    p.iterations,
                    float(p.grad_norm)
                );
            }
            let _ = writeln!(s, "# best_value={} best_restart={}", float(r.best_value), r.best_restart);
            ctx.emit(&s)?;
        }
    }
    if r.best_value < -VIOLATION_TOL {
        ctx.write_bundle(&report_bundle(&r), 0)?;
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SweepRow {
    beta: f64,
    best_value: f64,
    best_angle: f64,
    best_restart: usize,
}

fn cmd_sweep(ctx: &Context, d: usize, n: usize, grid: &[f64], restarts: usize) -> Result<i32> {
    if grid.is_empty() {
        return Err(Error::Argument("--beta-grid is empty".into()));
    }
    if let Some(b) = grid.iter().find(|b| !(-1.0..=0.0).contains(*b)) {
        return Err(Error::Argument(format!("grid value {b} outside [-1, 0]")));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(grid.len());
    for &beta in &grid {
        let cfg = SearchConfig {
            restarts,
            seed: ctx.seed,
            ..SearchConfig::new(d, n, beta)
        };
        let r = search(ctx, &cfg)?;
        rows.push(SweepRow {
            beta,
            best_value: r.best_value,
            best_angle: r.best_angle,
            best_restart: r.best_restart,
        });
    }
    let bracket = rows
        .windows(2)
        .find(|w| w[0].best_value < -VIOLATION_TOL && w[1].best_value >= -VIOLATION_TOL)
        .map(|w| [w[0].beta, w[1].beta]);
    match ctx.format {
        Format::Json => ctx.emit_json("rows", &rows, vec![("sign_change", serde_json::to_value(bracket)?)])?,
        Format::Csv => {
            let mut s = ctx.csv_header();
            s.push_str("beta,best_value,best_angle,best_restart\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    float(r.beta),
                    float(r.best_value),
                    float(r.best_angle),
                    r.best_restart
                );
            }
            if let Some([lo, hi]) = bracket {
                let _ = writeln!(s, "# sign_change beta_lo={} beta_hi={}", float(lo), float(hi));
            }
            ctx.emit(&s)?;
        }
    }
    Ok(EXIT_OK)
}

/// Accepts both a full output file (with `header`) and a bare report.
fn load_report(path: &Path) -> Result<SearchReport> {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let inner = v.get("report").cloned().unwrap_or(v);
    Ok(serde_json::from_value(inner)?)
}

fn cmd_verify(ctx: &Context, suite: &str, input: Option<&Path>) -> Result<i32> {
    let checks: Vec<Check> = if suite == "report" {
        let path = input.ok_or_else(|| Error::Argument("--suite report needs --in <file>".into()))?;
        check_report(&load_report(path)?)?
    } else {
        if input.is_some() {
            return Err(Error::Argument("--in is only used with --suite report".into()));
        }
        run_suite(suite, ctx.seed, &VerifyScale::default(), Some(&ctx.bundle_dir))?
    };
    let failed = checks.iter().filter(|c| !c.passed).count();
    match ctx.format {
        Format::Json => ctx.emit_json("checks", &checks, vec![("passed", (failed == 0).into())])?,
        Format::Csv => {
            let mut s = ctx.csv_header();
            for c in &checks {
                s.push_str(&c.line());
                s.push('\n');
            }
            let _ = writeln!(s, "# {} checks, {failed} failed", checks.len());
            ctx.emit(&s)?;
        }
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_hessian(ctx: &Context, d: usize, samples: usize, beta: f64) -> Result<i32> {
    let rows = hessian_spectrum_sweep(d, samples, ctx.seed, beta)?;
    let mut findings = 0;
    for r in rows.iter().filter(|r| r.is_finding()) {
        ctx.write_bundle(&r.to_bundle(d, beta), findings)?;
        findings += 1;
    }
    let min = rows.iter().map(|r| r.min_eigenvalue).fold(f64::INFINITY, f64::min);
    match ctx.format {
        Format::Json => ctx.emit_json(
            "rows",
            &rows,
            vec![("min_eigenvalue", min.into()), ("findings", findings.into())],
        )?,
        Format::Csv => {
            let mut s = ctx.csv_header();
            s.push_str("point_id,seed,d,beta,min_eigenvalue\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{d},{},{}", r.point_id, r.seed, float(beta), float(r.min_eigenvalue));
            }
            let _ = writeln!(s, "# summary min_eigenvalue={} findings={findings}", float(min));
            ctx.emit(&s)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_iterate(ctx: &Context, d: usize, k: u32, beta: f64, restarts: usize) -> Result<i32> {
    let params = WernerParams::new(d, beta)?;
    let cfg = CertifyConfig::new(restarts, ctx.seed);
    let (path, cert): (&str, Certification) = match iterate_werner(&params, k) {
        Ok(s) => ("iterate", certify_iterate(&s, &params, &cfg)?),
        Err(Error::DimensionLimit(_)) => ("power", certify_power(&params, k, &cfg)?),
        Err(e) => return Err(e),
    };
    match ctx.format {
        Format::Json => ctx.emit_json(
            "certification",
            &cert,
            vec![("path", path.into()), ("certifies", cert.certifies().into())],
        )?,
        Format::Csv => {
            let mut s = ctx.csv_header();
            s.push_str("k,copies,d,beta,path,min_value,certifies\n");
            let _ = writeln!(
                s,
                "{k},{},{d},{},{path},{},{}",
                cert.copies(),
                float(beta),
                float(cert.min_value),
                cert.certifies()
            );
            ctx.emit(&s)?;
        }
    }
    match cert.witness_bundle() {
        Some(b) => {
            ctx.write_bundle(&b, 0)?;
            Ok(EXIT_VIOLATION)
        }
        None => Ok(EXIT_OK),
    }
}

fn cmd_demo(ctx: &Context, d: usize) -> Result<i32> {
    let demo = nonconvexity_demo(d)?;
    match ctx.format {
        Format::Json => ctx.emit_json("demo", &demo, vec![])?,
        Format::Csv => {
            let mut s = ctx.csv_header();
            s.push_str("index,midpoint_gradient,pattern\n");
            for (i, (g, p)) in demo.midpoint_gradient.iter().zip(&demo.pattern).enumerate() {
                let _ = writeln!(s, "{i},{},{}", float(*g), float(*p));
            }
            let _ = writeln!(
                s,
                "# cosine_to_pattern={} endpoint_grad_norms={},{}",
                float(demo.cosine_to_pattern),
                float(demo.endpoint_grad_norms[0]),
                float(demo.endpoint_grad_norms[1])
            );
            ctx.emit(&s)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_rank2(ctx: &Context, d: usize, samples: usize, beta: f64) -> Result<i32> {
    if d < 2 {
        return Err(Error::Argument(format!("local dimension {d} < 2")));
    }
    let rows = rank2_sample(d, beta, samples, ctx.seed)?;
    let mut findings = 0;
    for b in rows.iter().filter_map(|r| r.bundle.as_ref()) {
        ctx.write_bundle(b, findings)?;
        findings += 1;
    }
    let worst = rows.iter().map(|r| r.slack).fold(f64::NEG_INFINITY, f64::max);
    match ctx.format {
        Format::Json => ctx.emit_json(
            "rows",
            &rows,
            vec![("max_slack", worst.into()), ("findings", findings.into())],
        )?,
        Format::Csv => {
            let mut s = ctx.csv_header();
            s.push_str("index,seed,p,q,r,slack,holds\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.index,
                    r.seed,
                    float(r.p),
                    float(r.q),
                    float(r.r),
                    float(r.slack),
                    r.holds
                );
            }
            let _ = writeln!(s, "# summary max_slack={} findings={findings}", float(worst));
            ctx.emit(&s)?;
        }
    }
    Ok(EXIT_OK)
}
