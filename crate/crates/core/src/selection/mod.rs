//! Feature-selection pipelines and their evaluation metrics.
//!
//! The Lasso pipelines share one front half: a Gaussian Gram per feature
//! (median-heuristic bandwidth), an output Gram chosen by task, double
//! centering, optional NOCCO normalization, and assembly of the quadratic
//! program. They then search λ for a support of `k` to `k + window`
//! features and keep the top `k` by coefficient.

mod greedy;
mod metrics;

use std::sync::Arc;
use std::time::Instant;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Output};
use crate::dependence::{hsic, GramDesign, Measure, QuadraticProblem};
use crate::kernels::{
    center, delta_gram, gaussian_gram, median_bandwidth, nocco_transform, symmetrize_checked, CenteredGram,
    KernelKind, DEFAULT_NOCCO_EPSILON,
};
use crate::solver::{search_lambda_for_k, solve_nn_lasso, Solution, SolverConfig};
use crate::{Error, Result};

pub use greedy::fhsic_forward_select;
pub use metrics::{fraction_correct, pearson, redundancy_rate, Redundancy};

/// Support-size slack used by the λ search.
pub const DEFAULT_WINDOW: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    HsicLasso,
    NoccoLasso,
    /// Greedy forward selection maximizing HSIC of the selected set.
    Fhsic,
    /// Top-k by single-feature HSIC with the output.
    MarginalHsic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::HsicLasso => "hsic-lasso",
            Method::NoccoLasso => "nocco-lasso",
            Method::Fhsic => "fhsic",
            Method::MarginalHsic => "marginal-hsic",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hsic-lasso" => Ok(Method::HsicLasso),
            "nocco-lasso" => Ok(Method::NoccoLasso),
            "fhsic" => Ok(Method::Fhsic),
            "marginal-hsic" => Ok(Method::MarginalHsic),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelectConfig {
    pub solver: SolverConfig,
    /// `GaussianMedian` or `Gaussian { sigma }`.
    pub input_kernel: KernelKind,
    /// `None` picks Gaussian-median for regression and delta for
    /// classification.
    pub output_kernel: Option<KernelKind>,
    /// Output Gram for `KernelKind::Precomputed`.
    #[serde(skip)]
    pub output_gram: Option<Arc<Mat<f64>>>,
    pub nocco_epsilon: f64,
    pub window: usize,
    /// Fixed λ; skips the support-size search.
    pub lambda: Option<f64>,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig {
            solver: SolverConfig::default(),
            input_kernel: KernelKind::GaussianMedian,
            output_kernel: None,
            output_gram: None,
            nocco_epsilon: DEFAULT_NOCCO_EPSILON,
            window: DEFAULT_WINDOW,
            lambda: None,
        }
    }
}

impl SelectConfig {
    /// Uses `gram` as the (uncentered) output Gram.
    pub fn with_output_gram(mut self, gram: Mat<f64>) -> Self {
        self.output_kernel = Some(KernelKind::Precomputed);
        self.output_gram = Some(Arc::new(gram));
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        match self.input_kernel {
            KernelKind::GaussianMedian => {}
            KernelKind::Gaussian { sigma } if sigma > 0.0 && sigma.is_finite() => {}
            other => {
                return Err(Error::InvalidArgument(format!("unsupported input kernel {other:?}")));
            }
        }
        if !(self.nocco_epsilon > 0.0 && self.nocco_epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "NOCCO epsilon must be positive, got {}",
                self.nocco_epsilon
            )));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidArgument(format!("lambda must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

/// Solver and kernel diagnostics attached to a [`SelectionResult`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Something needs attention: support window missed, solver did not
    /// converge, or fewer than `k` features could be ranked. Negative
    /// greedy gains are recorded below but do not raise the flag.
    pub flagged: bool,
    pub converged: Option<bool>,
    pub kkt_residual: Option<f64>,
    pub solver_iterations: Option<usize>,
    pub support_size: Option<usize>,
    pub in_window: Option<bool>,
    pub search_evaluations: Option<usize>,
    /// Median-heuristic bandwidth per feature; `None` for constant features.
    pub feature_bandwidths: Vec<Option<f64>>,
    pub output_bandwidth: Option<f64>,
    /// Constant features, scored zero.
    pub degenerate_features: Vec<usize>,
    /// Greedy criterion value after each step.
    pub greedy_trace: Vec<f64>,
    /// Greedy steps (0-based) whose best gain was negative.
    pub negative_gain_steps: Vec<usize>,
}

/// Ranked features produced by one selection run.
///
/// For the Lasso methods `scores` are coefficients and non-increasing. For
/// greedy selection `ranked` is the selection order and `scores` the
/// marginal gains, which need not be monotone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    pub ranked: Vec<usize>,
    pub scores: Vec<f64>,
    pub lambda: Option<f64>,
    pub diagnostics: Diagnostics,
}

/// Wall-clock seconds per pipeline stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub grams: f64,
    pub assembly: f64,
    pub solve: f64,
}

/// Assembled problem plus the bandwidths that produced it.
#[derive(Clone, Debug)]
pub struct BuiltProblem {
    pub problem: QuadraticProblem,
    pub feature_bandwidths: Vec<Option<f64>>,
    pub output_bandwidth: Option<f64>,
}

fn check_k(data: &Dataset, k: usize) -> Result<()> {
    if k == 0 || k > data.n_features() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={}",
            data.n_features()
        )));
    }
    if data.n_samples() < 2 {
        return Err(Error::InvalidDataset("need at least 2 samples".into()));
    }
    Ok(())
}

/// Centered Gram of one feature and its bandwidth (`None` when constant).
pub(crate) fn feature_gram(values: &[f64], kind: KernelKind, nocco: Option<f64>) -> Result<(CenteredGram, Option<f64>)> {
    let sigma = match kind {
        KernelKind::Gaussian { sigma } => sigma,
        KernelKind::GaussianMedian => match median_bandwidth(values) {
            Ok(s) => s,
            // constant feature: constant Gram, which centers to zero
            Err(Error::DegenerateBandwidth) => return Ok((CenteredGram::zeros(values.len()), None)),
            Err(e) => return Err(e),
        },
        other => return Err(Error::InvalidArgument(format!("unsupported input kernel {other:?}"))),
    };
    let kc = center(&gaussian_gram(values, sigma)?)?;
    let kc = match nocco {
        Some(eps) => nocco_transform(&kc, eps)?,
        None => kc,
    };
    Ok((kc, Some(sigma)))
}

/// Centered output Gram and its bandwidth when Gaussian.
pub fn output_gram(data: &Dataset, cfg: &SelectConfig) -> Result<(CenteredGram, Option<f64>)> {
    let n = data.n_samples();
    let kind = cfg.output_kernel.unwrap_or(match data.output() {
        Output::Real(_) => KernelKind::GaussianMedian,
        Output::Labels(_) => KernelKind::Delta,
    });
    match (kind, data.output()) {
        (KernelKind::Precomputed, _) => {
            let gram = cfg
                .output_gram
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("precomputed output kernel without a Gram matrix".into()))?;
            if gram.nrows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: gram.nrows() });
            }
            Ok((center(&symmetrize_checked(gram, 1e-9)?)?, None))
        }
        (KernelKind::Delta, out) => Ok((center(&delta_gram(&out.class_ids())?)?, None)),
        (KernelKind::GaussianMedian | KernelKind::Gaussian { .. }, Output::Real(y)) => feature_gram(y, kind, None),
        (KernelKind::GaussianMedian | KernelKind::Gaussian { .. }, Output::Labels(_)) => Err(Error::InvalidArgument(
            "Gaussian output kernel needs a real-valued output".into(),
        )),
    }
}

fn build_inner(data: &Dataset, cfg: &SelectConfig, measure: Measure, timings: &mut StageTimings) -> Result<BuiltProblem> {
    cfg.validate()?;
    let nocco = (measure == Measure::Nocco).then_some(cfg.nocco_epsilon);
    let start = Instant::now();
    let (lc, output_bandwidth) = output_gram(data, cfg)?;
    let lc = match nocco {
        Some(eps) => nocco_transform(&lc, eps)?,
        None => lc,
    };
    let (design, feature_bandwidths) = GramDesign::build(data.n_samples(), data.n_features(), |k| {
        feature_gram(data.feature(k), cfg.input_kernel, nocco)
    })?;
    timings.grams = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let problem = design.assemble(&lc, measure)?;
    timings.assembly = start.elapsed().as_secs_f64();
    Ok(BuiltProblem { problem, feature_bandwidths, output_bandwidth })
}

/// Builds the HSIC or NOCCO quadratic program for a dataset.
pub fn build_problem(data: &Dataset, cfg: &SelectConfig, measure: Measure) -> Result<BuiltProblem> {
    build_inner(data, cfg, measure, &mut StageTimings::default())
}

/// Support of `alpha` ordered by coefficient, then larger `c_k`, then lower
/// index.
pub fn rank_support(alpha: &[f64], c: &[f64]) -> Vec<usize> {
    let mut support: Vec<usize> = (0..alpha.len()).filter(|&k| alpha[k] > 0.0).collect();
    support.sort_by(|&a, &b| {
        alpha[b]
            .total_cmp(&alpha[a])
            .then(c[b].total_cmp(&c[a]))
            .then(a.cmp(&b))
    });
    support
}

fn lasso_select(
    data: &Dataset,
    k: usize,
    cfg: &SelectConfig,
    method: Method,
    timings: &mut StageTimings,
) -> Result<SelectionResult> {
    check_k(data, k)?;
    let measure = if method == Method::NoccoLasso { Measure::Nocco } else { Measure::Hsic };
    let built = build_inner(data, cfg, measure, timings)?;
    let problem = &built.problem;

    let start = Instant::now();
    let (solution, in_window, evaluations): (Solution, Option<bool>, Option<usize>) = match cfg.lambda {
        Some(lambda) => (solve_nn_lasso(problem, lambda, &cfg.solver)?, None, None),
        None => {
            let search = search_lambda_for_k(problem, k, cfg.window, &cfg.solver)?;
            (search.solution, Some(search.in_window), Some(search.evaluations))
        }
    };
    timings.solve = start.elapsed().as_secs_f64();

    let mut ranked = rank_support(&solution.alpha, problem.c());
    ranked.truncate(k);
    let scores = ranked.iter().map(|&j| solution.alpha[j]).collect();
    let degenerate_features = degenerate(&built.feature_bandwidths);
    let flagged = in_window == Some(false) || !solution.converged || ranked.len() < k;
    Ok(SelectionResult {
        method,
        ranked,
        scores,
        lambda: Some(solution.lambda),
        diagnostics: Diagnostics {
            flagged,
            converged: Some(solution.converged),
            kkt_residual: Some(solution.kkt_residual),
            solver_iterations: Some(solution.iterations),
            support_size: Some(solution.support_size()),
            in_window,
            search_evaluations: evaluations,
            feature_bandwidths: built.feature_bandwidths,
            output_bandwidth: built.output_bandwidth,
            degenerate_features,
            ..Diagnostics::default()
        },
    })
}

fn degenerate(bandwidths: &[Option<f64>]) -> Vec<usize> {
    bandwidths.iter().enumerate().filter(|(_, b)| b.is_none()).map(|(k, _)| k).collect()
}

/// HSIC Lasso: top-`k` features by coefficient.
pub fn hsic_lasso_select(data: &Dataset, k: usize, cfg: &SelectConfig) -> Result<SelectionResult> {
    lasso_select(data, k, cfg, Method::HsicLasso, &mut StageTimings::default())
}

/// NOCCO Lasso: as [`hsic_lasso_select`] with every centered Gram mapped
/// through `K̄ (K̄ + εnI)⁻¹`.
pub fn nocco_lasso_select(data: &Dataset, k: usize, cfg: &SelectConfig) -> Result<SelectionResult> {
    lasso_select(data, k, cfg, Method::NoccoLasso, &mut StageTimings::default())
}

/// Single-feature HSIC of every feature with the output.
pub fn marginal_hsic_scores(data: &Dataset, cfg: &SelectConfig) -> Result<(Vec<f64>, Vec<Option<f64>>)> {
    cfg.validate()?;
    let (lc, _) = output_gram(data, cfg)?;
    let pairs = (0..data.n_features())
        .into_par_iter()
        .map(|k| {
            let (kc, sigma) = feature_gram(data.feature(k), cfg.input_kernel, None)?;
            Ok((hsic(&kc, &lc)?, sigma))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairs.into_iter().unzip())
}

/// Baseline ranking by single-feature HSIC (ties to the lower index).
pub fn marginal_hsic_select(data: &Dataset, k: usize, cfg: &SelectConfig) -> Result<SelectionResult> {
    check_k(data, k)?;
    let (scores, bandwidths) = marginal_hsic_scores(data, cfg)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    Ok(SelectionResult {
        method: Method::MarginalHsic,
        scores: order.iter().map(|&j| scores[j]).collect(),
        ranked: order,
        lambda: None,
        diagnostics: Diagnostics {
            degenerate_features: degenerate(&bandwidths),
            feature_bandwidths: bandwidths,
            ..Diagnostics::default()
        },
    })
}

/// Runs `method` and reports per-stage wall-clock time alongside.
pub fn run_selection(
    data: &Dataset,
    method: Method,
    k: usize,
    cfg: &SelectConfig,
) -> Result<(SelectionResult, StageTimings)> {
    let mut timings = StageTimings::default();
    let result = match method {
        Method::HsicLasso | Method::NoccoLasso => lasso_select(data, k, cfg, method, &mut timings)?,
        Method::Fhsic => {
            let start = Instant::now();
            let r = fhsic_forward_select(data, k, cfg)?;
            timings.solve = start.elapsed().as_secs_f64();
            r
        }
        Method::MarginalHsic => {
            let start = Instant::now();
            let r = marginal_hsic_select(data, k, cfg)?;
            timings.grams = start.elapsed().as_secs_f64();
            r
        }
    };
    Ok((result, timings))
}
