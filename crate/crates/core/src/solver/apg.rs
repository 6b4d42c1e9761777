//! Accelerated projected gradient (FISTA) with adaptive restart.
//!
//! `x ← max(0, y − (Hy − c + λ1)/L)` with Nesterov momentum on `y`. The
//! momentum is reset whenever the objective increases; if a plain projected
//! step still increases it, `L` was underestimated and is doubled.

use super::{residual_from_gradient, SolverConfig};
use crate::dependence::QuadraticProblem;
use crate::{Error, Result};

const POWER_ITERS: usize = 200;

/// Largest eigenvalue magnitude of `H` by power iteration.
pub(super) fn spectral_bound(problem: &QuadraticProblem) -> f64 {
    let d = problem.dim();
    let h = problem.h();
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + (i as f64 + 1.0).sqrt().fract()).collect();
    let mut est = 0.0;
    for _ in 0..POWER_ITERS {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let mut w = vec![0.0; d];
        for (l, &vl) in v.iter().enumerate() {
            for (wk, &hkl) in w.iter_mut().zip(h.col_as_slice(l)) {
                *wk += hkl * vl;
            }
        }
        let next = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let done = (next - est).abs() <= 1e-12 * next;
        est = next;
        v = w;
        if done {
            break;
        }
    }
    est
}

fn project(x: &mut [f64], pinned: &[bool]) {
    for (v, &p) in x.iter_mut().zip(pinned) {
        if p || *v < 0.0 {
            *v = 0.0;
        }
    }
}

pub(super) fn run(
    problem: &QuadraticProblem,
    lambda: f64,
    cfg: &SolverConfig,
    pinned: &[bool],
    alpha: Vec<f64>,
) -> Result<(Vec<f64>, usize)> {
    let d = problem.dim();
    let mut lipschitz = 1.01 * spectral_bound(problem);
    if lipschitz == 0.0 {
        // H = 0: every coordinate is pinned and α = 0 is the only iterate
        return Ok((vec![0.0; d], 1));
    }
    let mut x = alpha;
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut f_x = problem.objective(&x, lambda);
    let mut restarted = false;
    let mut iters = 0;

    while iters < cfg.max_iters {
        iters += 1;
        let g_y = problem.gradient(&y);
        let step = 1.0 / lipschitz;
        let mut x_new: Vec<f64> = y.iter().zip(&g_y).map(|(&yk, &gk)| yk - step * (gk + lambda)).collect();
        project(&mut x_new, pinned);
        if x_new.iter().any(|a| !a.is_finite()) {
            return Err(Error::NumericalBreakdown { iteration: iters });
        }

        let g_x = problem.gradient(&x_new);
        let f_new = smooth_plus_l1(problem, lambda, &x_new, &g_x);
        // ignore increases at the roundoff level of the objective terms
        let magnitude: f64 = x_new.iter().zip(problem.c()).map(|(a, c)| (a * c).abs()).sum();
        if f_new > f_x + 16.0 * f64::EPSILON * (magnitude + f_x.abs() + problem.const_term().abs() + 1.0) {
            if restarted {
                lipschitz *= 2.0;
            }
            restarted = true;
            t = 1.0;
            y.clone_from(&x);
            continue;
        }
        restarted = false;

        let change = x_new.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = x_new.iter().zip(&x).map(|(&xn, &xo)| xn + beta * (xn - xo)).collect();
        x = x_new;
        t = t_next;
        f_x = f_new;

        let scale = 1.0 + x.iter().fold(0.0f64, |m, &a| m.max(a));
        if change <= cfg.tol * scale && residual_from_gradient(problem, lambda, &x, &g_x) <= cfg.tol {
            break;
        }
    }
    Ok((x, iters))
}

/// Objective from a precomputed gradient `Hx − c`.
fn smooth_plus_l1(problem: &QuadraticProblem, lambda: f64, x: &[f64], g: &[f64]) -> f64 {
    let mut v = problem.const_term();
    for ((a, gk), ck) in x.iter().zip(g).zip(problem.c()) {
        v += 0.5 * a * (gk - ck) + lambda * a;
    }
    v
}
