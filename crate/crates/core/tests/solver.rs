mod common;

use common::{active_set_oracle, kkt_oracle, random_problem, rng};
use ksel::solver::{lambda_max, solve_nn_lasso, Backend, SolverConfig};
use proptest::prelude::*;
use rand::Rng;

fn backends() -> [SolverConfig; 2] {
    [SolverConfig::default(), SolverConfig::default().with_backend(Backend::AcceleratedProximal)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn matches_active_set_oracle(seed in any::<u64>(), d in 1usize..5, extra in 0usize..4, frac in 0.01f64..0.99) {
        let mut r = rng(seed);
        let m = (d + extra).saturating_sub(2).max(1);
        let p = random_problem(&mut r, d, m);
        let lambda = frac * lambda_max(&p).max(1e-3);
        let best = active_set_oracle(&p, lambda);
        for cfg in backends() {
            let s = solve_nn_lasso(&p, lambda, &cfg).unwrap();
            prop_assert!((s.objective - best).abs() <= 1e-6, "{:?}: {} vs {}", cfg.backend, s.objective, best);
        }
    }

    #[test]
    fn backends_agree(seed in any::<u64>(), d in 1usize..50) {
        let mut r = rng(seed);
        let m = r.random_range(1..=2 * d);
        let p = random_problem(&mut r, d, m);
        let lambda = r.random_range(0.01..0.9) * lambda_max(&p).max(1e-3);
        let [cd, apg] = backends().map(|cfg| solve_nn_lasso(&p, lambda, &cfg).unwrap());
        prop_assert!((cd.objective - apg.objective).abs() <= 1e-6, "{} vs {}", cd.objective, apg.objective);
    }

    #[test]
    fn converged_certificate_is_sound(seed in any::<u64>(), d in 1usize..30) {
        let mut r = rng(seed);
        let p = random_problem(&mut r, d, d + 3);
        let lambda = r.random_range(0.01..0.9) * lambda_max(&p).max(1e-3);
        for cfg in backends() {
            let s = solve_nn_lasso(&p, lambda, &cfg).unwrap();
            prop_assert!(s.alpha.iter().all(|&a| a >= 0.0));
            if s.converged {
                prop_assert!(kkt_oracle(&p, lambda, &s.alpha) <= cfg.tol * (1.0 + 1e-6));
            }
        }
    }
}

#[test]
fn coordinate_descent_objective_never_increases() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let p = random_problem(&mut r, 12, 8);
        let lambda = 0.05 * lambda_max(&p);
        let mut last = f64::INFINITY;
        for sweeps in 1..40 {
            let cfg = SolverConfig { max_iters: sweeps, ..SolverConfig::default() };
            let s = solve_nn_lasso(&p, lambda, &cfg).unwrap();
            assert!(s.objective <= last + 1e-12 * last.abs().max(1.0), "seed {seed} sweep {sweeps}");
            last = s.objective;
        }
    }
}

#[test]
fn zero_curvature_rows_stay_zero() {
    use faer::Mat;
    use ksel::dependence::{Measure, QuadraticProblem};
    let h = Mat::from_fn(3, 3, |i, j| if i == 1 || j == 1 { 0.0 } else if i == j { 1.0 } else { 0.2 });
    let p = QuadraticProblem::new(h, vec![0.8, 0.1, 0.6], 0.0, Measure::Hsic).unwrap();
    for cfg in backends() {
        let s = solve_nn_lasso(&p, 0.2, &cfg).unwrap();
        assert_eq!(s.alpha[1], 0.0);
        assert!(s.converged);
    }
}
