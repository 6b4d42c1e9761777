//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls into the solver or the assembly code.
#![allow(dead_code)]

use faer::Mat;
use ksel::dependence::{Measure, QuadraticProblem};
use ksel::kernels::{center, gaussian_gram, median_bandwidth, CenteredGram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha20Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// `H = AᵀA`, `c = Aᵀb` with `A` of `m` rows, so `c` lies in the range of `H`
/// and the program is bounded even when `H` is singular.
pub fn random_problem(rng: &mut ChaCha20Rng, d: usize, m: usize) -> QuadraticProblem {
    let a = Mat::from_fn(m, d, |_, _| rng.random_range(-1.0..1.0));
    let b = uniform_vec(rng, m);
    let h = Mat::from_fn(d, d, |i, j| (0..m).map(|r| a[(r, i)] * a[(r, j)]).sum());
    let c = (0..d).map(|i| (0..m).map(|r| a[(r, i)] * b[r]).sum()).collect();
    let const_term = 0.5 * b.iter().map(|x| x * x).sum::<f64>();
    QuadraticProblem::new(h, c, const_term, Measure::Hsic).unwrap()
}

pub fn dense_objective(h: &Mat<f64>, c: &[f64], const_term: f64, lambda: f64, alpha: &[f64]) -> f64 {
    let d = c.len();
    let mut v = const_term;
    for i in 0..d {
        v += alpha[i] * (lambda - c[i]);
        for j in 0..d {
            v += 0.5 * alpha[i] * h[(i, j)] * alpha[j];
        }
    }
    v
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Minimum over all supports `S` of the stationary point of the objective
/// restricted to `S`, keeping only non-negative candidates.
pub fn active_set_oracle(problem: &QuadraticProblem, lambda: f64) -> f64 {
    let d = problem.dim();
    let (h, c) = (problem.h(), problem.c());
    let mut best = problem.const_term();
    for mask in 1u32..(1 << d) {
        let support: Vec<usize> = (0..d).filter(|&k| mask & (1 << k) != 0).collect();
        let a = support.iter().map(|&i| support.iter().map(|&j| h[(i, j)]).collect()).collect();
        let b = support.iter().map(|&i| c[i] - lambda).collect();
        let Some(x) = solve_dense(a, b) else { continue };
        if x.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut alpha = vec![0.0; d];
        for (&k, &v) in support.iter().zip(&x) {
            alpha[k] = v.max(0.0);
        }
        best = best.min(dense_objective(h, c, problem.const_term(), lambda, &alpha));
    }
    best
}

/// KKT residual straight from the definition.
pub fn kkt_oracle(problem: &QuadraticProblem, lambda: f64, alpha: &[f64]) -> f64 {
    let d = problem.dim();
    let (h, c) = (problem.h(), problem.c());
    let mut worst = 0.0f64;
    for k in 0..d {
        let g = (0..d).map(|l| h[(k, l)] * alpha[l]).sum::<f64>() - c[k] + lambda;
        let r = if alpha[k] == 0.0 { (-g).max(0.0) } else { g.abs() };
        worst = worst.max(r);
    }
    worst / c.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Median-bandwidth centered Gaussian Grams of random features.
pub fn random_grams(rng: &mut ChaCha20Rng, d: usize, n: usize) -> Vec<CenteredGram> {
    (0..d)
        .map(|_| {
            let x = uniform_vec(rng, n);
            center(&gaussian_gram(&x, median_bandwidth(&x).unwrap()).unwrap()).unwrap()
        })
        .collect()
}

/// `H`, `c` from the explicit `n² × d` matrix of vectorized Grams.
pub fn vectorized_problem(grams: &[CenteredGram], output: &CenteredGram) -> (Vec<Vec<f64>>, Vec<f64>) {
    let vec_of = |g: &CenteredGram| {
        let m = g.matrix();
        let n = m.nrows();
        (0..n * n).map(|p| m[(p % n, p / n)]).collect::<Vec<f64>>()
    };
    let design: Vec<Vec<f64>> = grams.iter().map(vec_of).collect();
    let target = vec_of(output);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let h = design.iter().map(|u| design.iter().map(|v| dot(u, v)).collect()).collect();
    let c = design.iter().map(|u| dot(u, &target)).collect();
    (h, c)
}

/// `½‖L̄ − Σ α_k K̄_k‖²_F` evaluated entrywise.
pub fn frobenius_objective(grams: &[CenteredGram], output: &CenteredGram, alpha: &[f64]) -> f64 {
    let n = output.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let fit: f64 = grams.iter().zip(alpha).map(|(g, a)| a * g.matrix()[(i, j)]).sum();
            let r = output.matrix()[(i, j)] - fit;
            s += r * r;
        }
    }
    0.5 * s
}
