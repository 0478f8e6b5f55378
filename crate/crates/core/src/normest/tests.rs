use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;

use super::*;
use crate::metricspace::{gen_clustered, DistanceOracle, Metric};
use crate::pcp::{SampledSketch, SketchView};

fn oracle(m: usize, n: usize, metric: Metric, seed: u64) -> DistanceOracle {
    let (p, q) = gen_clustered(m, n, 4.min(m.min(n)), 3, 0.05, seed).unwrap();
    DistanceOracle::from_points(Arc::new(p), Arc::new(q), metric).unwrap()
}

fn row_norms(a: &DMatrix<f64>) -> Vec<f64> {
    (0..a.nrows()).map(|i| a.row(i).norm_squared()).collect()
}

#[test]
fn zero_matrix_estimates_zero() {
    let a = DMatrix::<f64>::zeros(6, 5);
    let est = estimate_row_norms(&a, 3, 5, 1).unwrap();
    assert!(est.values.iter().all(|&v| v == 0.0));
    assert_eq!(est.anchor_bias, 0.0);
}

#[test]
fn all_ones_full_budget() {
    let a = DMatrix::from_element(4, 4, 1.0);
    let est = estimate_row_norms(&a, 4, 3, 0).unwrap();
    for v in est.values {
        assert_eq!(v, 5.0);
    }
}

#[test]
fn single_column_is_within_factor_two() {
    let o = oracle(20, 1, Metric::Euclidean, 3);
    let a = o.dense_uncounted();
    let est = estimate_row_norms(&o, 1, 3, 5).unwrap();
    for (e, t) in est.values.iter().zip(row_norms(&a)) {
        assert!(*e >= t && *e <= 2.0 * t, "{e} vs {t}");
    }
}

#[test]
fn estimates_dominate_anchor_bias() {
    let o = oracle(40, 30, Metric::L1, 2);
    let est = estimate_row_norms(&o, 5, 7, 9).unwrap();
    assert!(est.anchor_bias > 0.0);
    assert!(est.values.iter().all(|&v| v >= est.anchor_bias));
}

#[test]
fn single_repetition_is_unbiased() {
    let o = oracle(8, 40, Metric::Euclidean, 4);
    let truth = row_norms(&o.dense_uncounted());
    let trials = 4000;
    let mut mean = vec![0.0; 8];
    for s in 0..trials {
        let est = estimate_row_norms(&o, 4, 1, s).unwrap();
        for (m, v) in mean.iter_mut().zip(&est.values) {
            *m += (v - est.anchor_bias) / trials as f64;
        }
    }
    for (m, t) in mean.iter().zip(truth) {
        assert!((m / t - 1.0).abs() < 0.05, "mean {m} vs {t}");
    }
}

#[test]
fn entry_budget() {
    let (m, n, b, r) = (50, 60, 6, 4);
    let o = oracle(m, n, Metric::Euclidean, 8);
    let est = estimate_row_norms(&o, b, r, 0).unwrap();
    assert_eq!(est.entries_read, o.entries_read());
    assert!(est.entries_read as usize <= r * b * m + n + m);
    let o = oracle(m, n, Metric::Euclidean, 8);
    let est = estimate_col_norms(&o, b, r, 0).unwrap();
    assert!(est.entries_read as usize <= r * b * n + n + m);
}

#[test]
fn clustered_ratio_constant() {
    // Largest observed max(est/true, true/est) divided by n/b over 10 seeds, rounded up.
    const OBSERVED_C: f64 = 0.08;
    let o = oracle(256, 256, Metric::Euclidean, 11);
    let truth = row_norms(&o.dense_uncounted());
    let mut worst: f64 = 0.0;
    for s in 0..10 {
        let est = estimate_row_norms(&o, 16, default_repetitions(256), s).unwrap();
        for (e, t) in est.values.iter().zip(&truth) {
            worst = worst.max((e / t).max(t / e));
        }
    }
    let c = worst / (256.0 / 16.0);
    assert!(c <= OBSERVED_C, "observed C = {c}");
}

#[test]
fn weighted_single_class_equals_unweighted() {
    let o: Arc<dyn MatrixAccess> = Arc::new(oracle(30, 25, Metric::Euclidean, 5));
    let view = SketchView::root(o.clone());
    let a = estimate_row_norms(&o, 5, 3, 7).unwrap();
    let blocks = [(0..30).collect::<Vec<_>>()];
    let cols = [(0..25).collect::<Vec<_>>()];
    let b = estimate_norms_blocked(&o, Side::Rows, &blocks, &cols, 5, 3, 7).unwrap();
    let w = estimate_norms_weighted(&view, Side::Rows, 5, 3, 7).unwrap();
    assert_eq!(b.values, w.values);
    assert_eq!(w.blocks, 1);
    assert_eq!(a.anchor_bias, w.anchor_bias);
}

#[test]
fn two_classes_add_bias_per_block() {
    let a = DMatrix::from_fn(4, 6, |_, j| if j < 3 { 1.0 } else { 2.0 });
    let rows = [(0..4).collect::<Vec<_>>()];
    let cols = [vec![0, 1, 2], vec![3, 4, 5]];
    let est = estimate_norms_blocked(&a, Side::Rows, &rows, &cols, 3, 1, 0).unwrap();
    assert_eq!(est.blocks, 2);
    // Each block is sampled in full: (1 + 3) + (4 + 12).
    for v in est.values {
        assert_eq!(v, 20.0);
    }
    assert_eq!(est.anchor_bias, 5.0);
}

#[test]
fn per_column_classes_on_a_sketch() {
    let a: Arc<dyn MatrixAccess> = Arc::new(DMatrix::from_element(4, 4, 1.0));
    let sk = SampledSketch {
        side: Side::Columns,
        t: 4,
        seed: 0,
        indices: vec![0, 1, 2, 3],
        scales: vec![1.0, 2.0, 3.0, 4.0],
        classes: vec![0, 1, 2, 3],
    };
    let view = SketchView::root(a).compose(&sk).unwrap();
    let est = estimate_norms_weighted(&view, Side::Rows, 4, 1, 0).unwrap();
    assert_eq!(est.blocks, 4);
    // Every block is one column: d^2 + v^2 with d = v.
    let expected: f64 = [1.0, 4.0, 9.0, 16.0].iter().map(|v| 2.0 * v).sum();
    for v in est.values {
        assert!((v - expected).abs() < 1e-12);
    }
}

#[test]
fn rejects_bad_budgets() {
    let a = DMatrix::from_element(3, 3, 1.0);
    assert!(matches!(estimate_row_norms(&a, 4, 1, 0), Err(Error::InvalidParameter(_))));
    assert!(estimate_row_norms(&a, 0, 1, 0).is_err());
    assert!(estimate_row_norms(&a, 2, 0, 0).is_err());
    assert!(estimate_col_norms(&a, 4, 1, 0).is_err());
}

#[test]
fn median_of_even_and_odd() {
    assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn estimates_are_deterministic_and_bounded(seed in 0u64..1000, b in 1usize..12, r in 1usize..5) {
        let o = oracle(15, 12, Metric::L1, seed);
        let e1 = estimate_row_norms(&o, b, r, seed).unwrap();
        let e2 = estimate_row_norms(&o.fresh(), b, r, seed).unwrap();
        prop_assert_eq!(&e1.values, &e2.values);
        prop_assert!(e1.entries_read as usize <= r * b * 15 + 27);
        prop_assert!(e1.values.iter().all(|&v| v >= e1.anchor_bias));
    }

    #[test]
    fn estimates_bounded_by_sample_extremes(seed in 0u64..1000) {
        // With b = n every sample is still drawn with replacement, so only
        // the anchor term is fixed; the estimate stays within a factor n.
        let o = oracle(10, 6, Metric::Euclidean, seed);
        let truth = row_norms(&o.dense_uncounted());
        let est = estimate_row_norms(&o, 6, 5, seed).unwrap();
        for (e, t) in est.values.iter().zip(truth) {
            prop_assert!(*e <= est.anchor_bias + 6.0 * t + 1e-9);
        }
    }
}
