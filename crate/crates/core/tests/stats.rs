use dynabench::stats::{pca_screen, r2, ridge_fit, split, standardize, Dataset, RowMeta};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn dataset(x: Vec<Vec<f64>>, y: Vec<f64>) -> Dataset {
    let cols = (0..x[0].len()).map(|j| format!("f{j:02}")).collect();
    let meta = (0..y.len())
        .map(|i| RowMeta {
            benchmark: format!("b{i}"),
            family: "F".into(),
            n: i,
            seed: 0,
            backend: "sim".into(),
        })
        .collect();
    Dataset::new(cols, x, y, meta).unwrap()
}

/// Planted coefficients are recovered from 80 noisy rows.
#[test]
fn ridge_recovers_planted_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let noise = Normal::new(0.0, 0.02).unwrap();
    let beta: Vec<f64> = (0..24).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x: Vec<Vec<f64>> = (0..80)
        .map(|_| (0..24).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let y: Vec<f64> = x
        .iter()
        .map(|r| {
            r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + 0.3 + noise.sample(&mut rng)
        })
        .collect();
    let fit = ridge_fit(&dataset(x, y), 1e-3).unwrap();
    assert!(fit.train_r2 >= 0.95, "{}", fit.train_r2);
    let err = fit
        .raw_coefficients()
        .iter()
        .zip(&beta)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err <= 0.1, "sup-norm error {err}");
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (
        prop::collection::vec(prop::collection::vec(-10.0f64..10.0, cols), rows),
        prop::collection::vec(-5.0f64..5.0, rows),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// With λ = 0, SS_tot = SS_reg + SS_res on the training rows.
    #[test]
    fn least_squares_decomposes_variance((x, y) in matrix(12, 3)) {
        let d = dataset(x, y.clone());
        let fit = ridge_fit(&d, 0.0).unwrap();
        let yhat = fit.predict(&d);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
        let ss_reg: f64 = yhat.iter().map(|v| (v - mean).powi(2)).sum();
        let ss_res: f64 = yhat.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        prop_assume!(ss_tot > 1e-6);
        prop_assert!((ss_tot - ss_reg - ss_res).abs() <= 1e-8 * ss_tot);
        prop_assert!((r2(&yhat, &y).unwrap() - fit.train_r2).abs() < 1e-12);
    }

    #[test]
    fn singular_values_sorted_and_nonnegative((x, y) in matrix(8, 5)) {
        let (z, _, _) = standardize(&dataset(x, y)).unwrap();
        let (sv, dominant) = pca_screen(&z, 1.0 / 50.0).unwrap();
        prop_assert!(sv.iter().all(|&s| s >= 0.0));
        prop_assert!(sv.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(dominant <= sv.len());
    }

    #[test]
    fn splits_are_deterministic_and_exhaustive(rows in 5usize..60, seed in any::<u64>()) {
        let d = dataset((0..rows).map(|i| vec![i as f64]).collect(), (0..rows).map(|i| i as f64).collect());
        let (train, test) = split(&d, 0.8, seed).unwrap();
        prop_assert_eq!(train.len(), (0.8 * rows as f64).floor() as usize);
        prop_assert_eq!(&split(&d, 0.8, seed).unwrap().0, &train);
        let mut all: Vec<usize> = train.meta.iter().chain(&test.meta).map(|m| m.n).collect();
        all.sort();
        prop_assert_eq!(all, (0..rows).collect::<Vec<_>>());
    }
}
