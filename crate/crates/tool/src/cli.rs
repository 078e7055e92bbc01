//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use regret_core::constants::{check_consistency, TransferCertificate};
use regret_core::elicitation::{cell_decomposition, level_set_atlas, LevelSetAtlas};
use regret_core::lower_bound::{check_envelope, fit_exponents, geometric_grid, sweep_lambda, LowerBoundError, Regime};
use regret_core::model::Problem;
use regret_core::rational::{format_rational, parse_rational, Rational};
use regret_core::verifier::{
    check_range, verify_coverage, verify_distributional, verify_distributional_batches, verify_linearity,
    Sampler, VerificationReport, VerifierError,
};
use regret_core::zoo;
use serde_json::{json, Value};

use crate::files::{self, InputError, SCHEMA_VERSION, ZOO_SCHEME};
use crate::report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;
pub const EXIT_WINDOW: i32 = 5;
pub const EXIT_NONCONVERGENCE: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "regret", version, about = "Exact regret-transfer analysis of surrogate losses and links")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the level-set atlas and the consistency certificate.
    Analyze(AnalyzeArgs),
    /// Sample the transfer inequality with exact arithmetic.
    Verify(VerifyArgs),
    /// Sweep toward a boundary report and fit regret exponents.
    Lowerbound(LowerboundArgs),
    /// Built-in problems.
    #[command(subcommand)]
    Zoo(ZooCommand),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Problem file, or `zoo://<name>` for a built-in.
    problem: String,
    /// Rotate every link report to the next target report.
    #[arg(long)]
    flip_link: bool,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: ProblemArgs,
    /// Samples for the coverage and linearity checks.
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: ProblemArgs,
    /// A nonnegative rational, or `auto` for the exact optimal constant.
    #[arg(long, default_value = "auto")]
    alpha: String,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// Random finite data distributions checked at the same alpha.
    #[arg(long, default_value_t = 1000)]
    batches: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Data file with a finite distribution and a tabular hypothesis.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write violations as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LowerboundArgs {
    /// Zoo entry with a sweep, with or without the `zoo://` prefix.
    name: String,
    /// `N` points over [1e-3, 1e-1], or `HI:LO:N`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum ZooCommand {
    List,
    /// Print a built-in problem in the problem-file format.
    Export {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::input(e)
    }
}

impl From<VerifierError> for Failure {
    fn from(e: VerifierError) -> Self {
        Failure::input(e)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze(&a),
        Command::Verify(a) => verify(&a),
        Command::Lowerbound(a) => lowerbound(&a),
        Command::Zoo(ZooCommand::List) => zoo_list(),
        Command::Zoo(ZooCommand::Export { name, out }) => zoo_export(&name, out.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::input(format!("stdout: {e}")))
        }
    }
}

fn load(input: &ProblemArgs) -> Result<Problem, Failure> {
    let problem = files::load_problem(&input.problem)?;
    if input.flip_link {
        return zoo::flip_link(&problem).map_err(Failure::input);
    }
    Ok(problem)
}

struct Analysis {
    atlas: LevelSetAtlas,
    cells: Vec<regret_core::elicitation::SimplexCell>,
    certificate: TransferCertificate,
}

fn certify(problem: &Problem) -> Result<Analysis, Failure> {
    let loss = problem.polyhedral().map_err(Failure::input)?;
    let atlas = level_set_atlas(loss).map_err(Failure::input)?;
    let cells = cell_decomposition(loss, &problem.target, &atlas).map_err(Failure::input)?;
    let certificate = check_consistency(problem, &atlas, &cells).map_err(Failure::input)?;
    Ok(Analysis {
        atlas,
        cells,
        certificate,
    })
}

fn header(problem: &Problem) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("tool_version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("problem_digest".into(), json!(files::problem_digest(problem)));
    m.insert("labels".into(), json!(problem.labels.names()));
    m
}

fn analyze(args: &AnalyzeArgs) -> Result<i32, Failure> {
    let problem = load(&args.input)?;
    let a = certify(&problem)?;
    let coverage = verify_coverage(&problem, &a.atlas, args.samples, args.seed)?;
    let linearity = verify_linearity(&a.atlas, &problem, args.samples, args.seed)?;
    let mut out = header(&problem);
    out.insert("atlas".into(), report::atlas(&a.atlas));
    out.insert("cells".into(), report::cells(&problem, &a.cells, &a.atlas));
    out.insert("certificate".into(), report::certificate(&problem, &a.certificate));
    out.insert(
        "verification".into(),
        json!({
            "coverage": report::verification(&coverage),
            "linearity": report::verification(&linearity),
        }),
    );
    emit(&report::to_text(&Value::Object(out)), args.out.as_deref())?;
    if !a.certificate.consistent {
        eprintln!("inconsistent: a badly linked report reaches the optimal set (see certificate.witness)");
        return Ok(EXIT_INCONSISTENT);
    }
    if !coverage.passed() || !linearity.passed() {
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}

/// Splits `0..n` into at most `threads` contiguous chunks and merges the
/// chunk reports in index order.
fn chunked<F>(n: u64, threads: usize, seed: u64, f: F) -> Result<VerificationReport, Failure>
where
    F: Fn(Range<u64>) -> Result<VerificationReport, VerifierError> + Sync,
{
    let chunk = n.div_ceil(threads as u64).max(1);
    let ranges: Vec<Range<u64>> = (0..n.div_ceil(chunk))
        .map(|i| i * chunk..((i + 1) * chunk).min(n))
        .collect();
    let results: Vec<Result<VerificationReport, VerifierError>> = std::thread::scope(|s| {
        let handles: Vec<_> = ranges.into_iter().map(|r| s.spawn(|| f(r))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verification worker panicked"))
            .collect()
    });
    let mut merged = VerificationReport::empty(seed);
    for r in results {
        merged = merged.merge(r?);
    }
    Ok(merged)
}

fn verify(args: &VerifyArgs) -> Result<i32, Failure> {
    if args.samples == 0 {
        return Err(Failure::input("--samples must be positive"));
    }
    if args.threads == 0 {
        return Err(Failure::input("--threads must be positive"));
    }
    let problem = load(&args.input)?;
    let a = certify(&problem)?;
    let cert = &a.certificate;
    let alpha: Rational = if args.alpha == "auto" {
        if !cert.consistent {
            eprintln!("error: the pair is inconsistent, so no linear transfer constant exists; run `analyze` for the witness");
            return Ok(EXIT_INCONSISTENT);
        }
        cert.exact_alpha.clone()
    } else {
        let x = parse_rational(&args.alpha).map_err(|e| Failure::input(format!("--alpha: {e}")))?;
        if x < Rational::from_integer(0.into()) {
            return Err(Failure::input("--alpha must be nonnegative"));
        }
        x
    };
    let data = match &args.data {
        Some(path) => Some(files::load_data(path, &problem)?),
        None => None,
    };

    let sampler = Sampler::new(&problem, &a.atlas, cert.consistent.then_some(cert), args.seed)?;
    let conditional = chunked(args.samples, args.threads, args.seed, |r| check_range(&sampler, &alpha, r))?;
    let batches = chunked(args.batches, args.threads, args.seed, |r| {
        verify_distributional_batches(&sampler, &alpha, r)
    })?;
    let data_check = match &data {
        Some((d, h)) => Some(verify_distributional(&problem, &alpha, d, h)?),
        None => None,
    };

    let mut out = header(&problem);
    out.insert("alpha".into(), report::rational(&alpha));
    out.insert("consistent".into(), json!(cert.consistent));
    out.insert("injected_witnesses".into(), json!(sampler.injected()));
    out.insert("conditional".into(), report::verification(&conditional));
    out.insert("distributional".into(), report::verification(&batches));
    out.insert(
        "data".into(),
        data_check.as_ref().map_or(Value::Null, report::distributional_check),
    );
    emit(&report::to_text(&Value::Object(out)), args.out.as_deref())?;
    if let Some(path) = &args.csv {
        let file = std::fs::File::create(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        report::write_violations_csv(&[("conditional", &conditional), ("distributional", &batches)], file)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }

    let data_ok = data_check.as_ref().is_none_or(|c| c.holds());
    if conditional.passed() && batches.passed() && data_ok {
        return Ok(EXIT_OK);
    }
    if let Some(v) = conditional.violations.first() {
        eprintln!(
            "violation at sample {}: target regret {} > {}",
            v.index,
            format_rational(&v.lhs),
            format_rational(&v.rhs)
        );
    }
    Ok(EXIT_VIOLATION)
}

/// `N` or `HI:LO:N`.
fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::input(format!("--grid: expected `N` or `HI:LO:N`, found `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let (hi, lo, n) = match parts.as_slice() {
        [n] => (1e-1, 1e-3, n.parse::<usize>().map_err(|_| bad())?),
        [hi, lo, n] => (
            hi.parse::<f64>().map_err(|_| bad())?,
            lo.parse::<f64>().map_err(|_| bad())?,
            n.parse::<usize>().map_err(|_| bad())?,
        ),
        _ => return Err(bad()),
    };
    if n < 5 {
        return Err(Failure::input(format!("--grid: at least 5 points are needed to fit exponents, found {n}")));
    }
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(Failure::input("--grid: need 0 < LO < HI < 1"));
    }
    Ok(geometric_grid(hi, lo, n))
}

fn lower_bound_failure(e: LowerBoundError) -> Failure {
    match e {
        LowerBoundError::NonConvergence { .. } => Failure {
            code: EXIT_NONCONVERGENCE,
            message: e.to_string(),
        },
        other => Failure::input(other),
    }
}

fn lowerbound(args: &LowerboundArgs) -> Result<i32, Failure> {
    let name = args.name.strip_prefix(ZOO_SCHEME).unwrap_or(&args.name);
    let entry = zoo::builtin(name).map_err(Failure::input)?;
    let mut cfg = entry
        .sweep
        .clone()
        .ok_or_else(|| Failure::input(format!("zoo entry `{name}` has no sweep")))?;
    if let Some(spec) = &args.grid {
        cfg.lambdas = parse_grid(spec)?;
    }
    let rows = sweep_lambda(&entry.problem, &cfg).map_err(lower_bound_failure)?;
    let fit = fit_exponents(&rows).map_err(lower_bound_failure)?;
    let regime = Regime::of(&entry.problem);
    let within = regime.accepts(&fit);
    let envelope = match &entry.envelope {
        Some(env_cfg) => Some(check_envelope(&entry.problem, env_cfg).map_err(lower_bound_failure)?),
        None => None,
    };

    let mut out = serde_json::Map::new();
    out.insert("schema_version".into(), json!(SCHEMA_VERSION));
    out.insert("tool_version".into(), json!(env!("CARGO_PKG_VERSION")));
    out.insert("name".into(), json!(name));
    out.insert(
        "mode".into(),
        json!(match regime {
            Regime::Quadratic => "smooth",
            Regime::Linear => "control",
        }),
    );
    out.insert(
        "regime".into(),
        json!(match regime {
            Regime::Quadratic => "quadratic regime",
            Regime::Linear => "linear regime",
        }),
    );
    out.insert("grid_points".into(), json!(cfg.lambdas.len()));
    out.insert("fit".into(), report::fit(&fit));
    out.insert("within_window".into(), json!(within));
    out.insert("envelope".into(), envelope.as_ref().map_or(Value::Null, report::envelope));
    emit(&report::to_text(&Value::Object(out)), args.out.as_deref())?;
    if let Some(path) = &args.csv {
        let file = std::fs::File::create(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        report::write_sweep_csv(&rows, file).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    Ok(if within { EXIT_OK } else { EXIT_WINDOW })
}

fn zoo_list() -> Result<i32, Failure> {
    let mut text = String::new();
    for name in zoo::CATALOG {
        let entry = zoo::builtin(name).map_err(Failure::input)?;
        let kind = match (&entry.problem.surrogate, &entry.sweep) {
            (regret_core::model::Surrogate::Smooth(_), _) => "smooth sweep",
            (_, Some(_)) => "polyhedral control sweep",
            _ => "polyhedral",
        };
        text.push_str(&format!("{name}\t{kind}\n"));
    }
    emit(&text, None)?;
    Ok(EXIT_OK)
}

fn zoo_export(name: &str, out: Option<&Path>) -> Result<i32, Failure> {
    let name = name.strip_prefix(ZOO_SCHEME).unwrap_or(name);
    let entry = zoo::builtin(name).map_err(Failure::input)?;
    emit(&files::problem_to_json(&entry.problem), out)?;
    Ok(EXIT_OK)
}
