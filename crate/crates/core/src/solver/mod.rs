//! Non-negative Lasso over a precomputed quadratic program:
//!
//! ```text
//! min_{α ≥ 0}  ½ αᵀHα − cᵀα + λ‖α‖₁
//! ```
//!
//! The problem is convex, so a point satisfying the KKT conditions is a
//! global optimum. Every solve reports the KKT residual of its final iterate
//! and only claims convergence when that residual is within tolerance.

mod apg;
mod cd;
mod path;

use serde::{Deserialize, Serialize};

use crate::dataset::Seed;
use crate::dependence::QuadraticProblem;
use crate::{Error, Result};

pub use path::{lambda_grid, reg_path, search_lambda_for_k, LambdaSearch, SEARCH_BUDGET};

/// Coordinates whose curvature `H_kk` is at most this fraction of the
/// largest diagonal entry are pinned to zero.
pub(crate) const PIN_RATIO: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    CoordinateDescent,
    AcceleratedProximal,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cd" | "coordinate-descent" => Ok(Backend::CoordinateDescent),
            "apg" | "accelerated-proximal" => Ok(Backend::AcceleratedProximal),
            other => Err(Error::InvalidArgument(format!("unknown solver backend `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sweeps (coordinate descent) or iterations (proximal gradient).
    pub max_iters: usize,
    /// KKT tolerance.
    pub tol: f64,
    pub backend: Backend,
    /// Visit coordinates in a fresh random order every sweep instead of
    /// cyclically.
    pub random_sweep: bool,
    /// Seed of the sweep order when `random_sweep` is set.
    pub sweep_seed: Seed,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 100_000,
            tol: 1e-8,
            backend: Backend::CoordinateDescent,
            random_sweep: false,
            sweep_seed: Seed(0),
        }
    }
}

impl SolverConfig {
    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Non-negative coefficients; inactive entries are exactly zero.
    pub alpha: Vec<f64>,
    pub lambda: f64,
    /// Objective including the constant term and `λ‖α‖₁`.
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl Solution {
    /// Indices with a strictly positive coefficient.
    pub fn support(&self) -> Vec<usize> {
        self.alpha.iter().enumerate().filter(|(_, &a)| a > 0.0).map(|(k, _)| k).collect()
    }

    pub fn support_size(&self) -> usize {
        self.alpha.iter().filter(|&&a| a > 0.0).count()
    }
}

/// Smallest λ at which `α = 0` is optimal: `max(0, max_k c_k)`.
pub fn lambda_max(problem: &QuadraticProblem) -> f64 {
    problem.c().iter().copied().fold(0.0, f64::max)
}

/// KKT residual of `alpha` for the problem at `lambda`.
///
/// With `g = Hα − c + λ1`, inactive coordinates (`α_k = 0`) contribute
/// `max(0, −g_k)` and active ones `|g_k|`; the maximum is divided by
/// `max(1, ‖c‖_∞)`. It is zero exactly at the optimum.
pub fn kkt_residual(problem: &QuadraticProblem, lambda: f64, alpha: &[f64]) -> Result<f64> {
    check_alpha(problem, alpha)?;
    Ok(residual_from_gradient(problem, lambda, alpha, &problem.gradient(alpha)))
}

pub(crate) fn residual_from_gradient(problem: &QuadraticProblem, lambda: f64, alpha: &[f64], grad: &[f64]) -> f64 {
    let scale = problem.c().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let worst = alpha.iter().zip(grad).fold(0.0f64, |m, (&a, &g)| {
        let gk = g + lambda;
        let r = if a == 0.0 { (-gk).max(0.0) } else { gk.abs() };
        m.max(r)
    });
    worst / scale
}

fn check_alpha(problem: &QuadraticProblem, alpha: &[f64]) -> Result<()> {
    if alpha.len() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), found: alpha.len() });
    }
    if let Some((index, &value)) = alpha.iter().enumerate().find(|(_, &a)| !(a >= 0.0)) {
        return Err(Error::Infeasible { index, value });
    }
    Ok(())
}

/// Coordinates with (numerically) zero curvature.
pub(crate) fn pinned_coordinates(problem: &QuadraticProblem) -> Vec<bool> {
    let h = problem.h();
    let d = problem.dim();
    let max_diag = (0..d).map(|k| h[(k, k)]).fold(0.0f64, f64::max);
    (0..d).map(|k| h[(k, k)] <= PIN_RATIO * max_diag).collect()
}

/// Solves the non-negative Lasso from a cold start.
///
/// Non-convergence is not an error: the best iterate is returned with
/// `converged == false`.
pub fn solve_nn_lasso(problem: &QuadraticProblem, lambda: f64, cfg: &SolverConfig) -> Result<Solution> {
    solve_from(problem, lambda, cfg, None)
}

/// Solves from the given starting point (negative entries are clipped).
pub fn solve_from(
    problem: &QuadraticProblem,
    lambda: f64,
    cfg: &SolverConfig,
    warm_start: Option<&[f64]>,
) -> Result<Solution> {
    cfg.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let d = problem.dim();
    let pinned = pinned_coordinates(problem);
    let mut alpha = match warm_start {
        Some(w) if w.len() != d => return Err(Error::DimensionMismatch { expected: d, found: w.len() }),
        Some(w) => w.iter().map(|&a| if a > 0.0 && a.is_finite() { a } else { 0.0 }).collect(),
        None => vec![0.0; d],
    };
    for (a, &p) in alpha.iter_mut().zip(&pinned) {
        if p {
            *a = 0.0;
        }
    }
    let (alpha, iterations) = match cfg.backend {
        Backend::CoordinateDescent => cd::run(problem, lambda, cfg, &pinned, alpha)?,
        Backend::AcceleratedProximal => apg::run(problem, lambda, cfg, &pinned, alpha)?,
    };
    let grad = problem.gradient(&alpha);
    let kkt = residual_from_gradient(problem, lambda, &alpha, &grad);
    Ok(Solution {
        objective: problem.objective(&alpha, lambda),
        kkt_residual: kkt,
        converged: kkt <= cfg.tol,
        alpha,
        lambda,
        iterations,
    })
}
