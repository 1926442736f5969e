//! Command-line driver: ingestion, engine dispatch and artifact writing.
//!
//! Every engine writes under the output directory with fixed names:
//! `trace.csv`, `final_0.csv` (plus `final_1.csv` for a period-2 cycle) and
//! `summary.txt` of `key: value` lines. Exit codes: 0 success, 1 input error,
//! 2 iteration exhausted, 3 a reproduction check failed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::chain::analysis_summary;
use crate::evolution::{
    generation_law, Comparison, ConvergenceCriterion, ConvergenceReport, Convention, EvolutionError, Mode, TwoPhaseScheme,
    UpdateForm, Variant,
};
use crate::fixtures;
use crate::forest_sim::{estimate_law, estimate_pagerank_law, Mechanism, SimConfig, SimError};
use crate::format::{fmt_f64, parse_edgelist, parse_matrix_file, write_matrix_file, FormatError};
use crate::stochmat::{build_transition, Matrix, MatrixError, MatrixNorm, StochasticMatrix};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_EXHAUSTED: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Matrix,
    Edgelist,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Analyze,
    Diffuse,
    Pagerank,
    AlternateDiffuse,
    AlternatePagerank,
    Simulate,
    Verify,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Analyze => "analyze",
            Engine::Diffuse => "diffuse",
            Engine::Pagerank => "pagerank",
            Engine::AlternateDiffuse => "alternate-diffuse",
            Engine::AlternatePagerank => "alternate-pagerank",
            Engine::Simulate => "simulate",
            Engine::Verify => "verify",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gwforest", version, about = "Graph diffusion and PageRank as a two-phase Galton-Watson forest")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the chain and report the stationary vector and spectral gap.
    Analyze(RunArgs),
    /// Iterate F <- F P from F_0 = P.
    Diffuse(RunArgs),
    /// Iterate F <- alpha F P + (1 - alpha) Y.
    Pagerank(RunArgs),
    /// Diffusion with a lazy mutation matrix on even steps.
    AlternateDiffuse(RunArgs),
    /// PageRank with an alternating mutation or immigration schedule.
    AlternatePagerank(RunArgs),
    /// Monte Carlo estimate of the generation law of one lineage.
    Simulate(RunArgs),
    /// Run the reproduction suite on the bundled instance.
    Verify(RunArgs),
}

impl Command {
    pub fn into_config(self) -> RunConfig {
        let (engine, args) = match self {
            Command::Analyze(a) => (Engine::Analyze, a),
            Command::Diffuse(a) => (Engine::Diffuse, a),
            Command::Pagerank(a) => (Engine::Pagerank, a),
            Command::AlternateDiffuse(a) => (Engine::AlternateDiffuse, a),
            Command::AlternatePagerank(a) => (Engine::AlternatePagerank, a),
            Command::Simulate(a) => (Engine::Simulate, a),
            Command::Verify(a) => (Engine::Verify, a),
        };
        RunConfig { engine, args }
    }
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    /// Transition (or affinity) input; the bundled three-node instance when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "matrix")]
    pub format: InputFormat,
    /// Add every edge-list edge in both directions.
    #[arg(long)]
    pub undirected: bool,
    /// Immigration matrix Y (dense format).
    #[arg(long)]
    pub immigration: Option<PathBuf>,
    /// Even-step immigration matrix J for alternate-pagerank (dense format).
    #[arg(long)]
    pub even_immigration: Option<PathBuf>,
    #[arg(long, default_value = "frobenius")]
    pub norm: MatrixNorm,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    #[arg(long, default_value = "lt")]
    pub comparison: Comparison,
    #[arg(long = "max-iters", default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value = "both")]
    pub variant: Variant,
    #[arg(long, default_value = "first-odd")]
    pub convention: Convention,
    #[arg(long, default_value_t = 3)]
    pub generations: usize,
    #[arg(long, default_value_t = 100_000)]
    pub replicates: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Default for RunArgs {
    fn default() -> Self {
        Self {
            input: None,
            format: InputFormat::Matrix,
            undirected: false,
            immigration: None,
            even_immigration: None,
            norm: MatrixNorm::Frobenius,
            epsilon: 1e-8,
            comparison: Comparison::StrictLess,
            max_iters: 10_000,
            alpha: None,
            lambda: None,
            variant: Variant::Both,
            convention: Convention::FirstStepOdd,
            generations: 3,
            replicates: 100_000,
            seed: 0,
            out: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub engine: Engine,
    pub args: RunArgs,
}

impl RunConfig {
    pub fn new(engine: Engine, args: RunArgs) -> Self {
        Self { engine, args }
    }

    fn criterion(&self) -> ConvergenceCriterion {
        ConvergenceCriterion::with_epsilon(self.args.epsilon)
            .norm(self.args.norm)
            .comparison(self.args.comparison)
            .max_iterations(self.args.max_iters)
    }

    fn out_dir(&self) -> Result<&Path, CliError> {
        let out = self.args.out.as_deref().ok_or_else(|| CliError::Usage(format!("{} needs --out", self.engine.as_str())))?;
        fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
        Ok(out)
    }

    fn alpha(&self, default: f64) -> f64 {
        self.args.alpha.unwrap_or(default)
    }

    fn lambda(&self) -> Result<f64, CliError> {
        self.args.lambda.ok_or_else(|| CliError::Usage(format!("{} needs --lambda", self.engine.as_str())))
    }
}

/// Loads the transition matrix; exact inputs validate strictly, printed
/// (rounded) inputs fall back to relaxed validation and renormalization.
fn load_transition(args: &RunArgs) -> Result<StochasticMatrix, CliError> {
    let Some(path) = &args.input else {
        return Ok(fixtures::p());
    };
    match args.format {
        InputFormat::Edgelist => Ok(build_transition(&parse_edgelist(path, args.undirected)?)?),
        InputFormat::Matrix => load_stochastic(path),
    }
}

fn load_stochastic(path: &Path) -> Result<StochasticMatrix, CliError> {
    let m = parse_matrix_file(path)?;
    match StochasticMatrix::strict(m.clone()) {
        Ok(s) => Ok(s),
        Err(MatrixError::NotStochastic { .. }) => Ok(StochasticMatrix::ingest_rounded(m)?),
        Err(e) => Err(e.into()),
    }
}

fn uniform(n: usize) -> StochasticMatrix {
    StochasticMatrix::strict(Matrix::new(n, vec![1.0 / n as f64; n * n]).expect("square")).expect("rows sum to one")
}

/// `Y` from `--immigration`; the bundled `Y` for the bundled instance and
/// uniform rows otherwise.
fn load_immigration(args: &RunArgs, n: usize) -> Result<StochasticMatrix, CliError> {
    match (&args.immigration, &args.input) {
        (Some(path), _) => load_stochastic(path),
        (None, None) => Ok(fixtures::y()),
        (None, Some(_)) => Ok(uniform(n)),
    }
}

fn load_even_immigration(args: &RunArgs) -> Result<StochasticMatrix, CliError> {
    match (&args.even_immigration, &args.input) {
        (Some(path), _) => load_stochastic(path),
        (None, None) => Ok(fixtures::j()),
        (None, Some(_)) => Err(CliError::Usage("alternate-pagerank on a custom input needs --even-immigration".into())),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_trace(dir: &Path, report: &ConvergenceReport) -> Result<(), CliError> {
    let mut text = String::from("iteration,one_step_diff,two_step_diff\n");
    for t in &report.trace {
        let two = t.two_step.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(text, "{},{},{}", t.iteration, fmt_f64(t.one_step), two);
    }
    write_text(&dir.join("trace.csv"), &text)
}

/// `key: value` summary builder.
#[derive(Default)]
struct Summary(String);

impl Summary {
    fn put(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.0, "{key}: {value}");
        self
    }
}

fn write_report(config: &RunConfig, dir: &Path, report: &ConvergenceReport, extra: &[(&str, String)]) -> Result<i32, CliError> {
    write_trace(dir, report)?;
    let mut files = Vec::new();
    for (k, state) in report.final_states.iter().enumerate() {
        let name = format!("final_{k}.csv");
        let header = format!("{} state {k}, mode {}, {} iterations", config.engine.as_str(), report.mode, report.iterations);
        write_matrix_file(dir.join(&name), state, Some(&header))?;
        files.push(name);
    }
    let mut s = Summary::default();
    s.put("engine", config.engine.as_str())
        .put("mode", report.mode)
        .put("iterations", report.iterations)
        .put("criterion_norm", report.criterion.norm)
        .put("criterion_epsilon", fmt_f64(report.criterion.epsilon))
        .put("comparison", report.criterion.comparison.as_str())
        .put("max_iterations", report.criterion.max_iterations)
        .put("convention", report.convention.map_or("none", Convention::as_str))
        .put("final_state_files", files.join(","));
    if let Some(last) = report.trace.last() {
        s.put("last_one_step_diff", fmt_f64(last.one_step));
        s.put("last_two_step_diff", last.two_step.map_or_else(|| "none".to_string(), fmt_f64));
    }
    for (k, v) in extra {
        s.put(k, v);
    }
    s.put("warnings", if report.warnings.is_empty() { "none".to_string() } else { report.warnings.join("; ") });
    write_text(&dir.join("summary.txt"), &s.0)?;
    Ok(if report.mode == Mode::Exhausted { EXIT_EXHAUSTED } else { EXIT_OK })
}

fn run_engine(config: &RunConfig) -> Result<i32, CliError> {
    let args = &config.args;
    if config.engine == Engine::Verify {
        return run_verify(config);
    }
    let p = load_transition(args)?;
    let n = p.dim();
    let dir = config.out_dir()?;
    let criterion = config.criterion();
    match config.engine {
        Engine::Analyze => {
            write_text(&dir.join("summary.txt"), &format!("engine: analyze\nnodes: {n}\n{}", analysis_summary(&p)))?;
            write_matrix_file(dir.join("final_0.csv"), &p, Some("transition matrix"))?;
            Ok(EXIT_OK)
        }
        Engine::Diffuse => {
            let report = TwoPhaseScheme::diffusion(&p).run(&criterion)?;
            write_report(config, dir, &report, &[])
        }
        Engine::Pagerank => {
            let y = load_immigration(args, n)?;
            let alpha = config.alpha(0.9);
            let report = TwoPhaseScheme::pagerank(&p, &y, alpha)?.run(&criterion)?;
            let identical = y.has_identical_rows(1e-12);
            write_report(config, dir, &report, &[("alpha", alpha.to_string()), ("immigration_identical_rows", identical.to_string())])
        }
        Engine::AlternateDiffuse => {
            let lambda = config.lambda()?;
            let report = TwoPhaseScheme::alternating_diffusion(&p, lambda, args.convention)?.run(&criterion)?;
            write_report(config, dir, &report, &[("lambda", lambda.to_string())])
        }
        Engine::AlternatePagerank => {
            let lambda = config.lambda()?;
            let alpha = config.alpha(0.9);
            let (y, j) = (load_immigration(args, n)?, load_even_immigration(args)?);
            let scheme = TwoPhaseScheme::alternating_pagerank(&p, &y, &j, lambda, alpha, args.variant, args.convention)?;
            let report = scheme.run(&criterion.cycle_detection(true))?;
            let extra = [("alpha", alpha.to_string()), ("lambda", lambda.to_string()), ("variant", args.variant.as_str().to_string())];
            write_report(config, dir, &report, &extra)
        }
        Engine::Simulate => run_simulate(config, dir, p),
        Engine::Verify => unreachable!("handled above"),
    }
}

fn run_simulate(config: &RunConfig, dir: &Path, p: StochasticMatrix) -> Result<i32, CliError> {
    let args = &config.args;
    let g = args.generations;
    let (mechanism, analytic) = match args.alpha {
        None => {
            let mut laws = vec![p.clone()];
            for k in 1..=g {
                laws.push(generation_law(&p, &p, k)?);
            }
            (Mechanism::PureMutation { p: p.clone(), t: p.clone() }, laws)
        }
        Some(alpha) => {
            let y = load_immigration(args, p.dim())?;
            let laws = TwoPhaseScheme::pagerank(&p, &y, alpha)?.trajectory(g, UpdateForm::Standard)?;
            (Mechanism::Immigration { p: p.clone(), y, alpha }, laws)
        }
    };
    let label = mechanism.label();
    let sim = SimConfig::new(g, args.replicates, args.seed, mechanism)?;
    let mut trace = String::from("generation,max_row_tv\n");
    let first = if args.alpha.is_some() { 0 } else { 1 };
    let mut last = None;
    for (k, exact) in analytic.iter().enumerate().skip(first) {
        let law = if args.alpha.is_some() { estimate_pagerank_law(&sim, k)? } else { estimate_law(&sim, k)? };
        let tv = law.max_row_tv(exact);
        let _ = writeln!(trace, "{k},{}", fmt_f64(tv));
        last = Some((law, tv));
    }
    let (law, tv) = last.ok_or_else(|| CliError::Usage("simulate needs --generations >= 1".into()))?;
    write_text(&dir.join("trace.csv"), &trace)?;
    write_text(&dir.join("final_0.csv"), &law.to_text())?;
    let mut s = Summary::default();
    s.put("engine", "simulate")
        .put("mode", "sampled")
        .put("mechanism", label)
        .put("generations", g)
        .put("replicates", args.replicates)
        .put("seed", args.seed)
        .put("alpha", args.alpha.map_or_else(|| "none".to_string(), |a| a.to_string()))
        .put("max_row_tv", fmt_f64(tv))
        .put("final_state_files", "final_0.csv");
    write_text(&dir.join("summary.txt"), &s.0)?;
    Ok(EXIT_OK)
}

fn run_verify(config: &RunConfig) -> Result<i32, CliError> {
    let outcomes = verify::run_all();
    let mut table = String::new();
    for o in &outcomes {
        let _ = writeln!(table, "{o}");
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let _ = writeln!(table, "{passed}/{} checks passed", outcomes.len());
    print!("{table}");
    if config.args.out.is_some() {
        let dir = config.out_dir()?;
        let mut s = Summary::default();
        s.put("engine", "verify").put("passed", passed).put("total", outcomes.len());
        for o in &outcomes {
            s.put(&format!("criterion_{}", o.id), if o.passed { "pass" } else { "fail" });
        }
        write_text(&dir.join("summary.txt"), &s.0)?;
        write_text(&dir.join("verify.txt"), &table)?;
    }
    Ok(if passed == outcomes.len() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

/// Runs one engine and maps failures to exit codes, printing a diagnostic
/// line on stderr.
pub fn run(config: &RunConfig) -> i32 {
    match run_engine(config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gwforest {}: error: {e}", config.engine.as_str());
            EXIT_INPUT
        }
    }
}
