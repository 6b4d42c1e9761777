mod common;

use common::{frobenius_objective, random_grams, rng, uniform_vec, vectorized_problem};
use faer::Mat;
use ksel::dependence::{assemble_problem, frobenius, Measure};
use ksel::kernels::nocco_transform;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn assembly_matches_vectorized_design() {
    for seed in 0..10 {
        let mut r = rng(seed);
        let grams = random_grams(&mut r, 3, 5);
        let output = random_grams(&mut r, 1, 5).pop().unwrap();
        let p = assemble_problem(&grams, &output, Measure::Hsic).unwrap();
        let (h, c) = vectorized_problem(&grams, &output);
        for i in 0..3 {
            assert!((p.c()[i] - c[i]).abs() <= 1e-10, "seed {seed}");
            for j in 0..3 {
                assert!((p.h()[(i, j)] - h[i][j]).abs() <= 1e-10, "seed {seed}");
            }
        }
        let lnorm = frobenius(output.matrix(), output.matrix()).unwrap();
        assert!((p.const_term() - 0.5 * lnorm).abs() <= 1e-12);
    }
}

#[test]
fn nocco_assembly_matches_vectorized_design() {
    let mut r = rng(77);
    let grams: Vec<_> = random_grams(&mut r, 3, 6).iter().map(|g| nocco_transform(g, 1e-3).unwrap()).collect();
    let output = nocco_transform(&random_grams(&mut r, 1, 6)[0], 1e-3).unwrap();
    let p = assemble_problem(&grams, &output, Measure::Nocco).unwrap();
    let (h, c) = vectorized_problem(&grams, &output);
    for i in 0..3 {
        assert!((p.c()[i] - c[i]).abs() <= 1e-10);
        for j in 0..3 {
            assert!((p.h()[(i, j)] - h[i][j]).abs() <= 1e-10);
        }
    }
}

fn trace_of_product(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    (a * b).diagonal().column_vector().iter().sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn objective_equals_quadratic_expansion(seed in any::<u64>(), d in 1usize..6, n in 2usize..9) {
        let mut r = rng(seed);
        let grams = random_grams(&mut r, d, n);
        let output = random_grams(&mut r, 1, n).pop().unwrap();
        let p = assemble_problem(&grams, &output, Measure::Hsic).unwrap();
        let alpha: Vec<f64> = uniform_vec(&mut r, d).iter().map(|v| v.abs() * 2.0).collect();
        let direct = frobenius_objective(&grams, &output, &alpha);
        let expanded = p.smooth_objective(&alpha);
        prop_assert!((direct - expanded).abs() <= 1e-9 * direct.abs().max(p.const_term()).max(1e-300));
    }

    #[test]
    fn hsic_quadratic_form_is_nonnegative(seed in any::<u64>(), d in 1usize..8) {
        let mut r = rng(seed);
        let grams = random_grams(&mut r, d, 7);
        let output = random_grams(&mut r, 1, 7).pop().unwrap();
        let p = assemble_problem(&grams, &output, Measure::Hsic).unwrap();
        let a = uniform_vec(&mut r, d);
        let q: f64 = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| a[i] * p.h()[(i, j)] * a[j]).sum();
        let hn = p.h().norm_l2();
        prop_assert!(q >= -1e-10 * hn);
        prop_assert!(p.c().iter().all(|&c| c >= -1e-12));
    }

    #[test]
    fn frobenius_equals_trace_of_product(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let a = Mat::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
        let b = Mat::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
        let (a, b) = (&a + a.transpose(), &b + b.transpose());
        let f = frobenius(&a, &b).unwrap();
        let t = trace_of_product(&a, &b);
        prop_assert!((f - t).abs() <= 1e-10 * f.abs().max(1.0));
    }
}
