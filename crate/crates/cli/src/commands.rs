use std::time::Instant;

use ksel::bench::{run_bench, summarize, BenchConfig};
use ksel::dataset::{load_csv, Dataset, OutputColumn, Seed, Task};
use ksel::dependence::Measure;
use ksel::kernels::load_gram_csv;
use ksel::selection::{
    build_problem, redundancy_rate, run_selection, Diagnostics, Method, Redundancy, SelectConfig, StageTimings,
};
use ksel::solver::{lambda_grid, lambda_max, reg_path, SolverConfig};
use serde::Serialize;

use crate::output::{emit, field, json, num, opt_num, Table};
use crate::{BenchArgs, DataArgs, Failure, Format, PathArgs, SelectArgs, SolverArgs};

fn solver_config(args: &SolverArgs) -> SolverConfig {
    SolverConfig {
        max_iters: args.max_iters,
        tol: args.tol,
        backend: args.solver,
        random_sweep: args.random_sweep,
        sweep_seed: Seed(args.seed),
    }
}

fn load(args: &DataArgs, lambda: Option<f64>, window: usize) -> Result<(Dataset, SelectConfig), Failure> {
    let mut cfg = SelectConfig {
        solver: solver_config(&args.solver),
        nocco_epsilon: args.epsilon,
        window,
        lambda,
        ..SelectConfig::default()
    };
    if let Some(path) = &args.output_gram {
        cfg = cfg.with_output_gram(load_gram_csv(path)?);
    }
    cfg.validate()?;
    let data = load_csv(&args.input, &OutputColumn::from(args.output_col.as_str()), args.task)?;
    Ok((data, cfg))
}

#[derive(Serialize)]
struct DatasetInfo {
    input: String,
    output_col: String,
    task: Task,
    n_samples: usize,
    n_features: usize,
}

impl DatasetInfo {
    fn new(args: &DataArgs, data: &Dataset) -> Self {
        DatasetInfo {
            input: args.input.display().to_string(),
            output_col: args.output_col.clone(),
            task: args.task,
            n_samples: data.n_samples(),
            n_features: data.n_features(),
        }
    }
}

#[derive(Serialize)]
struct RankedFeature {
    rank: usize,
    /// 1-based column position among the features.
    index: usize,
    name: String,
    score: f64,
    bandwidth: Option<f64>,
}

#[derive(Serialize)]
struct Timings {
    load: f64,
    grams: f64,
    assembly: f64,
    solve: f64,
    total: f64,
}

#[derive(Serialize)]
struct EffectiveConfig<'a> {
    #[serde(flatten)]
    select: &'a SelectConfig,
    output_gram: Option<String>,
    seed: u64,
}

#[derive(Serialize)]
struct RunReport<'a> {
    version: &'static str,
    method: Method,
    dataset: DatasetInfo,
    k: usize,
    lambda: Option<f64>,
    ranked: Vec<RankedFeature>,
    redundancy: Option<Redundancy>,
    flagged: bool,
    diagnostics: &'a Diagnostics,
    timings: Timings,
    config: EffectiveConfig<'a>,
}

pub fn select(args: SelectArgs) -> Result<bool, Failure> {
    let start = Instant::now();
    let (data, cfg) = load(&args.data, args.lambda, args.window)?;
    let load_time = start.elapsed().as_secs_f64();
    let (result, StageTimings { grams, assembly, solve }) = run_selection(&data, args.method, args.k, &cfg)?;
    let redundancy = match result.ranked.len() {
        0 | 1 => None,
        _ => Some(redundancy_rate(&data, &result.ranked)?),
    };
    let bandwidth = |k: usize| result.diagnostics.feature_bandwidths.get(k).copied().flatten();
    let ranked: Vec<RankedFeature> = result
        .ranked
        .iter()
        .zip(&result.scores)
        .enumerate()
        .map(|(r, (&k, &score))| RankedFeature {
            rank: r + 1,
            index: k + 1,
            name: data.feature_name(k),
            score,
            bandwidth: bandwidth(k),
        })
        .collect();

    let contents = match args.format {
        Format::Csv => {
            let mut t = Table::new(&["rank", "index", "name", "score", "bandwidth"]);
            for f in &ranked {
                t.row([f.rank.to_string(), f.index.to_string(), field(&f.name), num(f.score), opt_num(f.bandwidth)]);
            }
            t.finish()
        }
        Format::Json => json(&RunReport {
            version: env!("CARGO_PKG_VERSION"),
            method: result.method,
            dataset: DatasetInfo::new(&args.data, &data),
            k: args.k,
            lambda: result.lambda,
            ranked,
            redundancy,
            flagged: result.diagnostics.flagged,
            diagnostics: &result.diagnostics,
            timings: Timings { load: load_time, grams, assembly, solve, total: start.elapsed().as_secs_f64() },
            config: EffectiveConfig {
                select: &cfg,
                output_gram: args.data.output_gram.as_ref().map(|p| p.display().to_string()),
                seed: args.data.solver.seed,
            },
        })?,
    };
    emit(args.out.as_deref(), &contents)?;
    Ok(result.diagnostics.flagged)
}

#[derive(Serialize)]
struct BenchReport<'a> {
    config: &'a BenchConfig,
    records: &'a [ksel::bench::TrialRecord],
    summaries: &'a [ksel::bench::BenchSummary],
}

pub fn bench_synth(args: BenchArgs) -> Result<bool, Failure> {
    let mut cfg = BenchConfig::new(args.data, args.methods, args.n, args.trials, Seed(args.seed));
    cfg.n_features = args.d;
    cfg.k = args.k;
    cfg.select.nocco_epsilon = args.epsilon;
    let mut records = run_bench(&cfg)?;
    if args.no_timing {
        records.iter_mut().for_each(|r| r.seconds = 0.0);
    }
    let summaries = summarize(&records);
    let contents = match args.format {
        Format::Json => json(&BenchReport { config: &cfg, records: &records, summaries: &summaries })?,
        Format::Csv => {
            let mut t =
                Table::new(&["kind", "method", "n", "trial", "seed", "fraction_correct", "lambda", "flagged", "seconds"]);
            for r in &records {
                t.row([
                    "trial".into(),
                    r.method.to_string(),
                    r.n.to_string(),
                    r.trial.to_string(),
                    r.seed.0.to_string(),
                    num(r.fraction_correct),
                    opt_num(r.lambda),
                    r.flagged.to_string(),
                    if args.no_timing { String::new() } else { num(r.seconds) },
                ]);
            }
            for s in &summaries {
                t.row([
                    "summary".into(),
                    s.method.to_string(),
                    s.n.to_string(),
                    String::new(),
                    String::new(),
                    num(s.mean_fraction),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            t.finish()
        }
    };
    emit(args.out.as_deref(), &contents)?;
    // flagged trials are visible per row; the table itself is complete
    Ok(false)
}

#[derive(Serialize)]
struct PathPoint {
    lambda: f64,
    support_size: usize,
    converged: bool,
    kkt_residual: f64,
    coefficients: Vec<f64>,
}

#[derive(Serialize)]
struct PathReport<'a> {
    method: Method,
    dataset: DatasetInfo,
    lambda_max: f64,
    feature_names: Vec<String>,
    points: Vec<PathPoint>,
    config: EffectiveConfig<'a>,
}

pub fn path(args: PathArgs) -> Result<bool, Failure> {
    let measure = match args.method {
        Method::HsicLasso => Measure::Hsic,
        Method::NoccoLasso => Measure::Nocco,
        other => return Err(Failure::usage(format!("path needs hsic-lasso or nocco-lasso, got {other}"))),
    };
    let (data, cfg) = load(&args.data, None, ksel::selection::DEFAULT_WINDOW)?;
    let built = build_problem(&data, &cfg, measure)?;
    let lmax = lambda_max(&built.problem);
    if lmax == 0.0 {
        return Err(Failure { code: 2, message: "no feature has positive dependence on the output; the path is empty".into() });
    }
    let grid = lambda_grid(lmax, args.count, args.floor)?;
    let solutions = reg_path(&built.problem, &grid, &cfg.solver)?;
    let flagged = solutions.iter().any(|s| !s.converged);
    let names: Vec<String> = (0..data.n_features()).map(|k| data.feature_name(k)).collect();

    let contents = match args.format {
        Format::Csv => {
            let mut t = Table::new(&["lambda", "support_size", "feature", "name", "coefficient", "converged"]);
            for s in &solutions {
                for (k, a) in s.alpha.iter().enumerate() {
                    t.row([
                        num(s.lambda),
                        s.support_size().to_string(),
                        (k + 1).to_string(),
                        field(&names[k]),
                        num(*a),
                        s.converged.to_string(),
                    ]);
                }
            }
            t.finish()
        }
        Format::Json => json(&PathReport {
            method: args.method,
            dataset: DatasetInfo::new(&args.data, &data),
            lambda_max: lmax,
            feature_names: names,
            points: solutions
                .into_iter()
                .map(|s| PathPoint {
                    lambda: s.lambda,
                    support_size: s.support_size(),
                    converged: s.converged,
                    kkt_residual: s.kkt_residual,
                    coefficients: s.alpha,
                })
                .collect(),
            config: EffectiveConfig {
                select: &cfg,
                output_gram: args.data.output_gram.as_ref().map(|p| p.display().to_string()),
                seed: args.data.solver.seed,
            },
        })?,
    };
    emit(args.out.as_deref(), &contents)?;
    Ok(flagged)
}
