use nalgebra::DMatrix;
use proptest::prelude::*;
use qek_core::geometry::{
    default_lambda_grid, geometric_difference, geometric_difference_reg, lambda_scan, relabel_dataset,
};

fn pd(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
        let a = DMatrix::from_vec(n, n, v);
        &a * a.transpose() + DMatrix::identity(n, n) * 0.1
    })
}

fn arb_pd(max: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (2..=max).prop_flat_map(pd)
}

fn arb_pair(max: usize) -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (2..=max).prop_flat_map(|n| (pd(n), pd(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_against_itself_gives_one(k in arb_pd(8)) {
        let g = geometric_difference(&k, &k).unwrap();
        prop_assert!((g - 1.0).abs() < 1e-8, "{}", g);
    }

    #[test]
    fn regularized_form_tends_to_unregularized((k1, k2) in arb_pair(6)) {
        let exact = geometric_difference(&k1, &k2).unwrap();
        let reg = geometric_difference_reg(&k1, &k2, 1e-9).unwrap().g12;
        prop_assert!((reg - exact).abs() <= 1e-5 * exact, "{} vs {}", reg, exact);
    }

    #[test]
    fn scan_values_are_finite_and_nonnegative((k1, k2) in arb_pair(6)) {
        let scan = lambda_scan(&k1, &k2, &default_lambda_grid(&k1), None).unwrap();
        for r in &scan.rows {
            prop_assert!(r.g12.is_finite() && r.g12 >= 0.0);
            prop_assert!(r.g_tra.is_finite() && r.g_tra >= 0.0);
        }
    }

    #[test]
    fn relabeling_flips_with_the_eigenvector_sign((k1, k2) in arb_pair(7)) {
        let r = relabel_dataset(&k1, &k2, 1e-3).unwrap();
        let mut sorted = r.raw.clone();
        sorted.sort_by(f64::total_cmp);
        let negated: Vec<f64> = r.raw.iter().map(|y| -y).collect();
        let mut neg_sorted = negated.clone();
        neg_sorted.sort_by(f64::total_cmp);
        let m = sorted.len();
        let median = |s: &[f64]| if m % 2 == 1 { s[m / 2] } else { 0.5 * (s[m / 2 - 1] + s[m / 2]) };
        let from_neg: Vec<f64> = negated.iter().map(|y| if y - median(&neg_sorted) >= 0.0 { 1.0 } else { -1.0 }).collect();
        let med = median(&sorted);
        for i in 0..m {
            if (r.raw[i] - med).abs() > 1e-12 {
                prop_assert_eq!(r.labels[i], -from_neg[i]);
            }
        }
        prop_assert_eq!(relabel_dataset(&k1, &k2, 1e-3).unwrap().labels, r.labels);
    }
}
