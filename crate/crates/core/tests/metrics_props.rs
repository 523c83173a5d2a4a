use nalgebra::DMatrix;
use nnas_core::circuit::build_ghz_metrology;
use nnas_core::metrics::*;
use nnas_core::sim::{sample_shots, simulate, SimMode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn entropy_of_reference_distributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let g: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    for method in [EntropyMethod::Vasicek, EntropyMethod::Ebrahimi, EntropyMethod::Auto] {
        let hu = differential_entropy(&u, method).unwrap().value;
        let hg = differential_entropy(&g, method).unwrap().value;
        assert!(hu.abs() < 0.05, "{method:?} uniform {hu}");
        let want = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        assert!((hg - want).abs() < 0.1, "{method:?} normal {hg}");
    }
}

#[test]
fn rmse_matches_delta_method() {
    let (n, theta, shots) = (4usize, 0.3, 8192u64);
    let c = build_ghz_metrology(n, theta).unwrap();
    let exact = *simulate::<f64>(&c, SimMode::Noiseless).unwrap().last().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 1000;
    let est: Vec<f64> = (0..trials)
        .map(|_| theta_estimate(sample_shots(exact, shots, &mut rng).unwrap(), n))
        .collect();
    let rmse = rmse_theta(&est, theta);
    let sigma = delta_method_sigma(n, theta, shots);
    // sampling spread of an RMSE estimated from `trials` draws
    let spread = sigma / (2.0 * trials as f64).sqrt();
    assert!((rmse - sigma).abs() < 3.0 * spread, "rmse {rmse} vs {sigma}");
}

#[test]
fn noiseless_metrology_reaches_heisenberg_rate() {
    // delta-method variance of the exact pipeline: 1 / (N_s n^2) for every θ
    let shots = 8192u64;
    let ns: Vec<usize> = (2..=6).collect();
    let thetas: Vec<f64> = (1..=10).map(|k| 0.05 + 0.1 * k as f64 / 2.0).collect();
    let curve: Vec<f64> = ns
        .iter()
        .map(|&n| {
            thetas
                .iter()
                .map(|&t| {
                    let y = *simulate::<f64>(&build_ghz_metrology(n, t).unwrap(), SimMode::Noiseless)
                        .unwrap()
                        .last()
                        .unwrap();
                    let grad = n as f64 * (1.0 - y * y).sqrt();
                    (1.0 - y * y) / shots as f64 / (grad * grad)
                })
                .sum::<f64>()
                / thetas.len() as f64
        })
        .collect();
    let fit = fit_rate(&ns, &curve, &curve).unwrap();
    assert!((fit.r - 2.0).abs() < 0.05, "{}", fit.r);
}

#[test]
fn sum_pool_conserves_total() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = DMatrix::from_fn(64, 64, |_, _| rng.random::<f64>() - 0.5);
    let p = sum_pool(&m, 2).unwrap();
    assert!((p.sum() - m.sum()).abs() < 1e-9);
}

/// Reference rank correlation: `1 - 6 Σ d^2 / (n (n^2 - 1))`, valid without ties.
fn textbook_spearman(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

#[test]
fn spearman_matches_textbook_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let x: Vec<f64> = (0..30).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..30).map(|_| rng.random()).collect();
        assert!((spearman(&x, &y).unwrap() - textbook_spearman(&x, &y)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn rd_is_antisymmetric(a in 1e-6f64..1.0, b in 1e-6f64..1.0) {
        prop_assert!((rd_from_errors(a, b).value + rd_from_errors(b, a).value).abs() < 1e-12);
    }

    #[test]
    fn mae_modes_agree_on_constant_errors(errs in proptest::collection::vec((0.0f64..1.0, 1usize..8), 1..6)) {
        let truth: Vec<Vec<f64>> = errs.iter().map(|&(_, l)| vec![0.0; l]).collect();
        let pred: Vec<Vec<f64>> = errs.iter().map(|&(e, l)| vec![e; l]).collect();
        let seq = mae(&pred, &truth, MaeMode::SeqNorm).unwrap();
        let mean_err = errs.iter().map(|e| e.0).sum::<f64>() / errs.len() as f64;
        prop_assert!((seq - mean_err).abs() < 1e-12);
        if errs.iter().all(|e| e.1 == errs[0].1) {
            prop_assert!((mae(&pred, &truth, MaeMode::Point).unwrap() - seq).abs() < 1e-12);
        }
    }

    #[test]
    fn spearman_matrix_is_rank_invariant(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = DMatrix::from_fn(4, 4, |_, _| rng.random::<f64>());
        let pooled = DMatrix::from_fn(8, 8, |_, _| rng.random::<f64>());
        let a = spearman_matrix(&s, &pooled).unwrap();
        let b = spearman_matrix(&s.map(|v| v.powi(3) + 2.0), &pooled.map(|v| v.exp())).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            for (x, y) in ra.iter().zip(rb) {
                prop_assert!((x.unwrap() - y.unwrap()).abs() < 1e-12);
            }
        }
    }
}
