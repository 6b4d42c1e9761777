//! `ksel`: batch front end for kernel-based feature selection.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or numerical error,
//! 3 result produced but flagged (solver not converged or support window
//! missed). Output is written only once the whole run has succeeded.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ksel::dataset::{SyntheticModel, Task};
use ksel::selection::Method;
use ksel::solver::Backend;

#[derive(Parser, Debug)]
#[command(name = "ksel", version, about = "Kernel-based feature selection (HSIC Lasso, NOCCO Lasso, greedy HSIC)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank features of a CSV dataset and emit a report.
    Select(SelectArgs),
    /// Repeated recovery trials on synthetic data.
    BenchSynth(BenchArgs),
    /// Coefficients along a log-spaced regularization path.
    Path(PathArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// CSV file with a header row; one column per feature plus the output.
    #[arg(long)]
    input: PathBuf,
    /// Output column, by header name or 0-based index.
    #[arg(long)]
    output_col: String,
    #[arg(long, default_value = "regression")]
    task: Task,
    /// Headerless n×n CSV used as the output Gram instead of a built-in kernel.
    #[arg(long)]
    output_gram: Option<PathBuf>,
    /// NOCCO regularizer.
    #[arg(long, default_value_t = ksel::kernels::DEFAULT_NOCCO_EPSILON)]
    epsilon: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// `cd` (coordinate descent) or `apg` (accelerated proximal gradient).
    #[arg(long, default_value = "cd")]
    solver: Backend,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Seed for randomized sweep order (only with --random-sweep).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    random_sweep: bool,
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "hsic-lasso")]
    method: Method,
    /// Number of features to report.
    #[arg(long)]
    k: usize,
    /// Fixed regularization weight; skips the support-size search.
    #[arg(long)]
    lambda: Option<f64>,
    /// Support-size slack for the λ search.
    #[arg(long, default_value_t = ksel::selection::DEFAULT_WINDOW)]
    window: usize,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// `data1` (additive) or `data2` (non-additive).
    #[arg(long)]
    data: SyntheticModel,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "hsic-lasso")]
    methods: Vec<Method>,
    /// Base seed; trial r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of features (model default when omitted).
    #[arg(long)]
    d: Option<usize>,
    /// Features to select (number of relevant features when omitted).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = ksel::kernels::DEFAULT_NOCCO_EPSILON)]
    epsilon: f64,
    /// Leave the wall-clock column empty so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct PathArgs {
    #[command(flatten)]
    data: DataArgs,
    /// `hsic-lasso` or `nocco-lasso`.
    #[arg(long, default_value = "hsic-lasso")]
    method: Method,
    /// Grid points, log-spaced from lambda_max down.
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Smallest λ as a fraction of lambda_max.
    #[arg(long, default_value_t = 1e-3)]
    floor: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<ksel::Error> for Failure {
    fn from(e: ksel::Error) -> Self {
        let code = match e {
            ksel::Error::InvalidArgument(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("KSEL_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::usage(format!("KSEL_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Select(args) => commands::select(args),
        Command::BenchSynth(args) => commands::bench_synth(args),
        Command::Path(args) => commands::path(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(3),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
