use nalgebra::DMatrix;
use proptest::prelude::*;
use qek_core::ml::{f1_score, stratified_folds, svm_predict, svm_train};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian kernel on random 2-D points with noisy linear labels.
fn problem(n: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0]).collect();
    let mut labels: Vec<f64> = pts
        .iter()
        .map(|p| if p[0] + 0.3 * p[1] + 0.2 * (rng.random::<f64>() - 0.5) > 0.0 { 1.0 } else { -1.0 })
        .collect();
    labels[0] = 1.0;
    labels[1] = -1.0;
    let k = DMatrix::from_fn(n, n, |i, j| {
        let d = (pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2);
        (-d / 0.5).exp()
    });
    (k, labels)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn trained_alphas_are_feasible(n in 4usize..40, seed in 0u64..10_000, c in 0.01f64..100.0) {
        let (k, y) = problem(n, seed);
        let m = svm_train(&k, &y, c).unwrap();
        let balance: f64 = m.alphas.iter().zip(&y).map(|(a, y)| a * y).sum();
        prop_assert!(balance.abs() < 1e-9 * c.max(1.0), "yᵀα = {}", balance);
        for a in &m.alphas {
            prop_assert!(*a >= 0.0 && *a <= c);
        }
    }

    #[test]
    fn constant_shift_leaves_predictions_unchanged(n in 4usize..30, seed in 0u64..10_000, shift in -0.5f64..0.5) {
        let (k, y) = problem(n, seed);
        let shifted = k.map(|x| x + shift);
        let a = svm_train(&k, &y, 1.0).unwrap();
        let b = svm_train(&shifted, &y, 1.0).unwrap();
        let da = a.decision_values(&k).unwrap();
        let db = b.decision_values(&shifted).unwrap();
        let pa = svm_predict(&a, &k).unwrap();
        let pb = svm_predict(&b, &shifted).unwrap();
        for i in 0..n {
            if da[i].abs() > 1e-2 {
                prop_assert_eq!(pa[i], pb[i]);
            }
            prop_assert!((da[i] - db[i]).abs() < 5e-3, "{} vs {}", da[i], db[i]);
        }
    }

    #[test]
    fn folds_partition_the_data(labels in proptest::collection::vec(any::<bool>(), 10..80), folds in 2usize..6, seed in any::<u64>()) {
        let y: Vec<f64> = labels.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positives = labels.iter().filter(|&&b| b).count();
        let result = stratified_folds(&y, folds, &mut rng);
        if positives < folds || y.len() - positives < folds {
            prop_assert!(result.is_err());
            return Ok(());
        }
        let parts = result.unwrap();
        prop_assert_eq!(parts.len(), folds);
        let mut seen = vec![0usize; y.len()];
        for f in &parts {
            for &i in f {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn f1_ignores_sample_order(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..60), seed in any::<u64>()) {
        let pred: Vec<f64> = pairs.iter().map(|p| if p.0 { 1.0 } else { -1.0 }).collect();
        let truth: Vec<f64> = pairs.iter().map(|p| if p.1 { 1.0 } else { -1.0 }).collect();
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let p2: Vec<f64> = order.iter().map(|&i| pred[i]).collect();
        let t2: Vec<f64> = order.iter().map(|&i| truth[i]).collect();
        prop_assert_eq!(f1_score(&pred, &truth).unwrap(), f1_score(&p2, &t2).unwrap());
    }
}
