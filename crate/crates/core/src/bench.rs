//! Synthetic recovery benchmark: repeated trials of a selection method on
//! generated data, scored by the fraction of true features recovered.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{generate, Seed, SyntheticModel};
use crate::dependence::packed_len;
use crate::selection::{fraction_correct, run_selection, Method, SelectConfig};
use crate::{Error, Result};

/// Rough cap on memory held by concurrently running trials.
const TRIAL_MEMORY_BUDGET: usize = 2 << 30;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchConfig {
    pub model: SyntheticModel,
    pub methods: Vec<Method>,
    pub sample_sizes: Vec<usize>,
    pub trials: usize,
    pub base_seed: Seed,
    /// Number of features; the model default when `None`.
    pub n_features: Option<usize>,
    /// Features to select; the number of relevant features when `None`.
    pub k: Option<usize>,
    pub select: SelectConfig,
}

impl BenchConfig {
    pub fn new(model: SyntheticModel, methods: Vec<Method>, sample_sizes: Vec<usize>, trials: usize, base_seed: Seed) -> Self {
        BenchConfig {
            model,
            methods,
            sample_sizes,
            trials,
            base_seed,
            n_features: None,
            k: None,
            select: SelectConfig::default(),
        }
    }

    pub fn d(&self) -> usize {
        self.n_features.unwrap_or(self.model.default_features())
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(self.model.n_relevant())
    }
}

/// One (method, n, trial) outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: Method,
    pub n: usize,
    pub trial: usize,
    pub seed: Seed,
    pub fraction_correct: f64,
    pub ranked: Vec<usize>,
    pub lambda: Option<f64>,
    pub flagged: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub method: Method,
    pub n: usize,
    pub trials: usize,
    pub mean_fraction: f64,
}

/// Runs one trial: trial `r` uses seed `base + r`, so every sample size and
/// method sees the same underlying draws.
pub fn run_trial(cfg: &BenchConfig, method: Method, n: usize, trial: usize) -> Result<TrialRecord> {
    let seed = cfg.base_seed.run(trial as u64);
    let data = generate(cfg.model, n, cfg.d(), seed)?;
    let start = Instant::now();
    let (result, _) = run_selection(&data, method, cfg.k(), &cfg.select)?;
    let seconds = start.elapsed().as_secs_f64();
    let truth = data.truth().ok_or(Error::MissingTruth)?;
    Ok(TrialRecord {
        method,
        n,
        trial,
        seed,
        fraction_correct: fraction_correct(&result.ranked, truth)?,
        ranked: result.ranked,
        lambda: result.lambda,
        flagged: result.diagnostics.flagged,
        seconds,
    })
}

/// All trials, ordered by method, then sample size, then trial.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<TrialRecord>> {
    if cfg.trials == 0 || cfg.methods.is_empty() || cfg.sample_sizes.is_empty() {
        return Err(Error::InvalidArgument("benchmark needs methods, sample sizes and at least one trial".into()));
    }
    let mut out = Vec::with_capacity(cfg.methods.len() * cfg.sample_sizes.len() * cfg.trials);
    for &method in &cfg.methods {
        for &n in &cfg.sample_sizes {
            // the packed Gram design dominates per-trial memory
            let per_trial = 8 * packed_len(n) * (cfg.d() + 1) + 1;
            let batch = (TRIAL_MEMORY_BUDGET / per_trial).clamp(1, rayon::current_num_threads().max(1));
            let trials: Vec<usize> = (0..cfg.trials).collect();
            for chunk in trials.chunks(batch) {
                let records = chunk
                    .par_iter()
                    .map(|&t| run_trial(cfg, method, n, t))
                    .collect::<Result<Vec<_>>>()?;
                out.extend(records);
            }
        }
    }
    Ok(out)
}

/// Mean fraction correct per (method, n), in first-appearance order.
pub fn summarize(records: &[TrialRecord]) -> Vec<BenchSummary> {
    let mut out: Vec<(BenchSummary, f64)> = Vec::new();
    for r in records {
        match out.iter_mut().find(|(s, _)| s.method == r.method && s.n == r.n) {
            Some((s, sum)) => {
                s.trials += 1;
                *sum += r.fraction_correct;
            }
            None => out.push((BenchSummary { method: r.method, n: r.n, trials: 1, mean_fraction: 0.0 }, r.fraction_correct)),
        }
    }
    out.into_iter()
        .map(|(mut s, sum)| {
            s.mean_fraction = sum / s.trials as f64;
            s
        })
        .collect()
}
