use serde::{Deserialize, Serialize};

use super::{lambda_max, solve_from, Solution, SolverConfig};
use crate::dependence::QuadraticProblem;
use crate::{Error, Result};

/// Bisection steps allowed when searching for a support size.
pub const SEARCH_BUDGET: usize = 50;

/// `count` log-spaced values from `lambda_max` down to
/// `floor_fraction · lambda_max`.
pub fn lambda_grid(lambda_max: f64, count: usize, floor_fraction: f64) -> Result<Vec<f64>> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda_max must be positive, got {lambda_max}")));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("grid needs at least one point".into()));
    }
    if !(floor_fraction > 0.0 && floor_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("floor fraction {floor_fraction} is outside (0, 1)")));
    }
    if count == 1 {
        return Ok(vec![lambda_max]);
    }
    let step = floor_fraction.ln() / (count - 1) as f64;
    Ok((0..count).map(|i| lambda_max * (step * i as f64).exp()).collect())
}

/// Solves along a strictly descending λ grid, warm-starting each point from
/// the previous solution.
pub fn reg_path(problem: &QuadraticProblem, grid: &[f64], cfg: &SolverConfig) -> Result<Vec<Solution>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty lambda grid".into()));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(format!(
            "lambda grid must be strictly descending ({} then {})",
            w[0], w[1]
        )));
    }
    let mut out: Vec<Solution> = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let warm = out.last().map(|s| s.alpha.as_slice());
        out.push(solve_from(problem, lambda, cfg, warm)?);
    }
    Ok(out)
}

/// Outcome of [`search_lambda_for_k`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSearch {
    pub lambda: f64,
    pub solution: Solution,
    /// Whether the support size landed in `[k, k + window]`.
    pub in_window: bool,
    /// Number of solves performed.
    pub evaluations: usize,
}

/// Finds λ whose solution has between `k_target` and `k_target + window`
/// non-zero coefficients by bisection on `(0, λ_max]`.
///
/// Support size is not monotone in λ for correlated problems, so the search
/// may miss the window. After [`SEARCH_BUDGET`] steps it returns the
/// evaluated λ whose support is closest above `k_target` (or the largest
/// support seen if none reached it) with `in_window == false`.
pub fn search_lambda_for_k(
    problem: &QuadraticProblem,
    k_target: usize,
    window: usize,
    cfg: &SolverConfig,
) -> Result<LambdaSearch> {
    let d = problem.dim();
    if k_target == 0 || k_target > d {
        return Err(Error::InvalidArgument(format!("target support size {k_target} outside 1..={d}")));
    }
    let lmax = lambda_max(problem);
    if lmax == 0.0 {
        // α = 0 for every λ > 0
        let lambda = f64::EPSILON;
        let solution = solve_from(problem, lambda, cfg, None)?;
        return Ok(LambdaSearch { lambda, solution, in_window: false, evaluations: 1 });
    }

    let (mut lo, mut hi) = (0.0, lmax);
    let mut above: Option<(usize, Solution)> = None;
    let mut below: Option<(usize, Solution)> = None;
    let mut warm: Option<Vec<f64>> = None;
    for step in 1..=SEARCH_BUDGET {
        let lambda = 0.5 * (lo + hi);
        let sol = solve_from(problem, lambda, cfg, warm.as_deref())?;
        let s = sol.support_size();
        if (k_target..=k_target + window).contains(&s) {
            return Ok(LambdaSearch { lambda, solution: sol, in_window: true, evaluations: step });
        }
        warm = Some(sol.alpha.clone());
        if s < k_target {
            hi = lambda;
            if below.as_ref().is_none_or(|(b, _)| s > *b) {
                below = Some((s, sol));
            }
        } else {
            lo = lambda;
            if above.as_ref().is_none_or(|(a, _)| s < *a) {
                above = Some((s, sol));
            }
        }
    }
    let (_, solution) = above.or(below).expect("at least one evaluation");
    Ok(LambdaSearch {
        lambda: solution.lambda,
        solution,
        in_window: false,
        evaluations: SEARCH_BUDGET,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::Measure;
    use crate::solver::solve_nn_lasso;
    use faer::Mat;

    fn diag_problem(c: &[f64]) -> QuadraticProblem {
        let d = c.len();
        QuadraticProblem::new(Mat::identity(d, d), c.to_vec(), 0.0, Measure::Hsic).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = lambda_grid(2.0, 5, 1e-2).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 2.0);
        assert!((g[4] - 0.02).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(lambda_grid(2.0, 1, 0.1).unwrap(), vec![2.0]);
        assert!(lambda_grid(0.0, 3, 0.1).is_err());
        assert!(lambda_grid(1.0, 3, 1.0).is_err());
    }

    #[test]
    fn path_at_lambda_max_is_zero() {
        let p = diag_problem(&[0.5, 0.2]);
        let sols = reg_path(&p, &[lambda_max(&p)], &SolverConfig::default()).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].alpha, vec![0.0, 0.0]);
    }

    #[test]
    fn path_rejects_non_descending_grid() {
        let p = diag_problem(&[0.5, 0.2]);
        let cfg = SolverConfig::default();
        assert!(reg_path(&p, &[0.1, 0.2], &cfg).is_err());
        assert!(reg_path(&p, &[0.1, 0.1], &cfg).is_err());
        assert!(reg_path(&p, &[], &cfg).is_err());
    }

    #[test]
    fn scalar_support_non_increasing_in_lambda() {
        // α(λ) = max(0, 1 − λ)
        let p = QuadraticProblem::new(Mat::identity(1, 1), vec![1.0], 0.0, Measure::Hsic).unwrap();
        let grid: Vec<f64> = (0..19).map(|i| 1.9 - 0.1 * i as f64).collect();
        let sols = reg_path(&p, &grid, &SolverConfig::default()).unwrap();
        for (s, &l) in sols.iter().zip(&grid) {
            assert!((s.alpha[0] - (1.0 - l).max(0.0)).abs() < 1e-12);
        }
        let sizes: Vec<usize> = sols.iter().map(Solution::support_size).collect();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn search_separable_thresholds() {
        let p = diag_problem(&[3.0, 2.0, 1.0]);
        let r = search_lambda_for_k(&p, 2, 0, &SolverConfig::default()).unwrap();
        assert!(r.in_window);
        assert!(r.lambda > 1.0 && r.lambda < 2.0, "{}", r.lambda);
        assert_eq!(r.solution.support(), vec![0, 1]);
    }

    #[test]
    fn search_single_feature_of_pair() {
        let p = diag_problem(&[0.5, 0.2]);
        let r = search_lambda_for_k(&p, 1, 0, &SolverConfig::default()).unwrap();
        assert!(r.in_window);
        assert!(r.lambda > 0.2 && r.lambda < 0.5);
    }

    #[test]
    fn search_all_active_on_positive_definite() {
        // H⁻¹c > 0 so every coordinate activates as λ → 0⁺
        let h = Mat::from_fn(3, 3, |i, j| if i == j { 2.0 } else { 0.5 });
        let p = QuadraticProblem::new(h, vec![1.0, 1.2, 0.9], 0.0, Measure::Hsic).unwrap();
        let r = search_lambda_for_k(&p, 3, 0, &SolverConfig::default()).unwrap();
        assert!(r.in_window);
        assert_eq!(r.solution.support_size(), 3);
    }

    #[test]
    fn search_unreachable_is_flagged() {
        // the second feature never activates
        let p = diag_problem(&[1.0, -1.0]);
        let r = search_lambda_for_k(&p, 2, 0, &SolverConfig::default()).unwrap();
        assert!(!r.in_window);
        assert_eq!(r.solution.support_size(), 1);

        let zero = diag_problem(&[0.0, 0.0]);
        let r = search_lambda_for_k(&zero, 1, 3, &SolverConfig::default()).unwrap();
        assert!(!r.in_window);
        assert_eq!(r.solution.support_size(), 0);
        assert!(search_lambda_for_k(&zero, 3, 0, &SolverConfig::default()).is_err());
        assert!(search_lambda_for_k(&zero, 0, 0, &SolverConfig::default()).is_err());
    }

    #[test]
    fn warm_path_matches_cold_solves() {
        let h = Mat::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.3 });
        let p = QuadraticProblem::new(h, vec![1.0, 0.8, 0.5, 0.2], 0.0, Measure::Hsic).unwrap();
        let cfg = SolverConfig::default();
        let grid = lambda_grid(lambda_max(&p), 12, 1e-3).unwrap();
        for (warm, &l) in reg_path(&p, &grid, &cfg).unwrap().iter().zip(&grid) {
            let cold = solve_nn_lasso(&p, l, &cfg).unwrap();
            assert!((warm.objective - cold.objective).abs() <= 1e-8);
        }
    }
}
