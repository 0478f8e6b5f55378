use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::metricspace::DistanceOracle;

fn random(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = stream(seed, &[77]);
    DMatrix::from_fn(m, n, |_, _| rng.random::<f64>() - 0.5)
}

fn low_rank(m: usize, n: usize, r: usize, seed: u64) -> DMatrix<f64> {
    random(m, r, seed) * random(r, n, seed + 1)
}

fn residual(a: &DMatrix<f64>, f: &LowRankFactors) -> f64 {
    (a - &f.left * &f.right).norm_squared()
}

fn assert_orthonormal_rows(q: &DMatrix<f64>) {
    let g = q * q.transpose();
    let id = DMatrix::<f64>::identity(g.nrows(), g.ncols());
    assert!((g - id).amax() < 1e-9);
}

#[test]
fn svd_of_diagonal() {
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]));
    let f = truncated_svd(&a, 2).unwrap();
    assert!((residual(&a, &f) - 1.0).abs() < 1e-12);
    assert_eq!(f.singular_values.as_deref().map(|s| s.len()), Some(2));
    let top = svd_k(&a, 3).unwrap();
    for (s, e) in top.sigma.iter().zip([3.0, 2.0, 1.0]) {
        assert!((s - e).abs() < 1e-12);
    }
}

#[test]
fn svd_rank_one_is_exact() {
    let u = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, -1.0, 0.5]);
    let v = DMatrix::from_row_slice(1, 3, &[2.0, 0.0, 1.0]);
    let a = &u * &v;
    let f = truncated_svd(&a, 1).unwrap();
    assert!(residual(&a, &f) < 1e-20);
}

#[test]
fn svd_of_constant_tall_matrix() {
    for (m, n) in [(40, 30), (30, 40), (64, 8)] {
        let a = DMatrix::from_element(m, n, 1.0);
        let f = truncated_svd(&a, 1).unwrap();
        assert!(residual(&a, &f) < 1e-18, "{m}x{n}");
        let s = singular_values(&a);
        assert!((s[0] - ((m * n) as f64).sqrt()).abs() < 1e-9);
    }
}

#[test]
fn jacobi_fallback_is_a_valid_svd() {
    for a in [DMatrix::from_element(40, 30, 1.0), random(20, 6, 3), low_rank(15, 9, 2, 4), DMatrix::zeros(5, 3)] {
        let (u, s, vt) = jacobi_svd(&a);
        assert!((&u * DMatrix::from_diagonal(&s) * &vt - &a).amax() < 1e-10);
        assert!((u.transpose() * &u - DMatrix::<f64>::identity(a.ncols(), a.ncols())).amax() < 1e-10);
        assert!((&vt * vt.transpose() - DMatrix::<f64>::identity(a.ncols(), a.ncols())).amax() < 1e-10);
    }
}

#[test]
fn svd_sign_is_canonical() {
    let a = random(12, 8, 4);
    let top = svd_k(&a, 3).unwrap();
    for c in 0..3 {
        let col = top.u.column(c);
        let pivot = col.iter().fold(0.0f64, |b, &v| if v.abs() > b.abs() { v } else { b });
        assert!(pivot >= 0.0);
    }
    assert!(svd_k(&a, 9).is_err());
}

#[test]
fn tail_energy_matches_residual() {
    let a = random(15, 10, 2);
    for k in 0..=10 {
        let f = truncated_svd(&a, k).unwrap();
        assert!((residual(&a, &f) - tail_energy(&a, k)).abs() < 1e-9);
    }
}

#[test]
fn isl_exact_on_low_rank() {
    let a = low_rank(40, 30, 3, 5);
    let f = input_sparsity_lra(&a, 3, 0.5, 1).unwrap();
    assert!(residual(&a, &f) <= 1e-18 * a.norm_squared().max(1.0));
    assert_orthonormal_rows(&f.right);
}

#[test]
fn isl_zero_matrix_has_empty_width() {
    let a = DMatrix::zeros(10, 8);
    let f = input_sparsity_lra(&a, 2, 0.5, 0).unwrap();
    assert_eq!(f.rank_bound(), 0);
    assert_eq!((f.rows(), f.cols()), (10, 8));
    let p = f.padded(2);
    assert_eq!(p.rank_bound(), 2);
    assert!(p.product(usize::MAX).unwrap().iter().all(|&v| v == 0.0));
}

#[test]
fn isl_relative_error_on_noisy_matrix() {
    let a = low_rank(200, 150, 5, 3) + random(200, 150, 9) * 0.01;
    let f = input_sparsity_lra(&a, 5, 0.5, 2).unwrap();
    assert!(f.rank_bound() <= 5);
    assert!(residual(&a, &f) <= 1.5 * tail_energy(&a, 5));
}

#[test]
fn isl_rejects_bad_parameters() {
    let a = random(5, 4, 0);
    assert!(input_sparsity_lra(&a, 0, 0.5, 0).is_err());
    assert!(input_sparsity_lra(&a, 5, 0.5, 0).is_err());
    assert!(input_sparsity_lra(&a, 2, 1.0, 0).is_err());
}

#[test]
fn leverage_of_identity_block() {
    let q = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    assert_eq!(leverage_scores_orthonormal(&q, Side::Rows).unwrap(), vec![1.0, 1.0, 0.0]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let q = DMatrix::from_row_slice(1, 2, &[h, h]);
    let l = leverage_scores_orthonormal(&q, Side::Rows).unwrap();
    assert!((l[0] - 0.5).abs() < 1e-15 && (l[1] - 0.5).abs() < 1e-15);
    assert!(leverage_scores_orthonormal(&q.transpose(), Side::Columns).is_ok());
}

#[test]
fn leverage_rejects_non_orthonormal() {
    let q = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
    assert!(matches!(leverage_scores_orthonormal(&q, Side::Rows), Err(Error::Contract(_))));
}

#[test]
fn leverage_scores_sum_to_rank() {
    let q = orthonormalize_rows(&random(4, 30, 6));
    let l = leverage_scores_orthonormal(&q, Side::Rows).unwrap();
    assert!((l.iter().sum::<f64>() - 4.0).abs() < 1e-9);
    assert!(l.iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
}

#[test]
fn regression_exact_on_row_space() {
    let wt = orthonormalize_rows(&random(3, 50, 1));
    let x0 = random(20, 3, 2);
    let a = &x0 * &wt;
    let sol = sketched_regression_right(&a, &wt, 0.5, Some(12), 3).unwrap();
    assert!((&sol.x - &x0).amax() < 1e-9);
    assert_eq!((sol.x.nrows(), sol.x.ncols()), (20, 3));
}

#[test]
fn regression_with_sparse_support_is_exact() {
    // W^T touches only columns 0 and 2; only those are read.
    let wt = DMatrix::from_row_slice(2, 6, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    let a = DMatrix::from_fn(4, 6, |i, j| (i * 6 + j) as f64);
    let o = DistanceOracle::from_matrix(a.clone()).unwrap();
    let sol = sketched_regression_right(&o, &wt, 0.5, None, 0).unwrap();
    assert!(sol.exact);
    assert_eq!(sol.sketch.indices, vec![0, 2]);
    assert_eq!(o.entries_read(), 8);
    for i in 0..4 {
        assert_eq!(sol.x[(i, 0)], a[(i, 0)]);
        assert_eq!(sol.x[(i, 1)], a[(i, 2)]);
    }
}

#[test]
fn regression_left_near_optimal() {
    let b = orthonormalize(&random(300, 4, 3)).0;
    let a = &b * random(4, 20, 4) + random(300, 20, 5) * 0.1;
    let sol = sketched_regression_left(&a, &b, 0.5, Some(40), 7).unwrap();
    assert!(!sol.exact);
    assert_eq!((sol.x.nrows(), sol.x.ncols()), (4, 20));
    let opt = (&a - &b * (b.transpose() * &a)).norm_squared();
    assert!((&a - &b * &sol.x).norm_squared() <= 1.5 * opt);
}

#[test]
fn regression_rejects_small_sample() {
    let wt = orthonormalize_rows(&random(3, 10, 1));
    let a = random(5, 10, 2);
    assert!(matches!(
        sketched_regression_right(&a, &wt, 0.5, Some(2), 0),
        Err(Error::InvalidParameter(_))
    ));
    assert!(sketched_regression_right(&a, &random(3, 10, 3), 0.5, None, 0).is_err());
}

#[test]
fn orthonormalize_drops_dependent_columns() {
    let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    let (q, r) = orthonormalize(&m);
    assert_eq!(q.ncols(), 2);
    assert!((&q * &r - &m).amax() < 1e-12);
    let (q, _) = orthonormalize(&DMatrix::zeros(4, 2));
    assert_eq!(q.ncols(), 0);
}

#[test]
fn orthonormalize_identity() {
    let id = DMatrix::<f64>::identity(4, 4);
    let (q, r) = orthonormalize(&id);
    assert_eq!(q, id);
    assert_eq!(r, id);
}

#[test]
fn lstsq_minimum_norm() {
    let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
    let b = DMatrix::from_row_slice(1, 1, &[2.0]);
    let x = lstsq(&a, &b).unwrap();
    assert!((x[(0, 0)] - 1.0).abs() < 1e-12 && (x[(1, 0)] - 1.0).abs() < 1e-12);
}

#[test]
fn size_formulas() {
    assert_eq!(countsketch_size(2, 0.5, 8.0), 128);
    assert_eq!(default_regression_size(2, 0.5), (160.0 * 4f64.ln()).ceil() as usize);
}

#[test]
fn product_respects_cap() {
    let f = LowRankFactors::zeros(10, 10, 1);
    assert!(matches!(f.product(99), Err(Error::DenseCapExceeded { entries: 100, cap: 99 })));
    assert!(LowRankFactors::new(DMatrix::zeros(2, 2), DMatrix::zeros(3, 2)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn orthonormalize_spans_input(m in 2usize..12, n in 1usize..8, seed in 0u64..500) {
        let a = random(m, n, seed);
        let (q, r) = orthonormalize(&a);
        prop_assert!(q.ncols() <= m.min(n));
        let g = q.transpose() * &q;
        prop_assert!((g - DMatrix::<f64>::identity(q.ncols(), q.ncols())).amax() < 1e-9);
        prop_assert!((&q * r - &a).amax() < 1e-9);
    }

    #[test]
    fn isl_never_beats_svd_and_is_orthonormal(seed in 0u64..500, k in 1usize..4) {
        let a = random(25, 20, seed);
        let f = input_sparsity_lra(&a, k, 0.5, seed).unwrap();
        prop_assert!(f.rank_bound() <= k);
        prop_assert!(residual(&a, &f) >= tail_energy(&a, k) * (1.0 - 1e-9));
        let g = &f.right * f.right.transpose();
        prop_assert!((g - DMatrix::<f64>::identity(f.rank_bound(), f.rank_bound())).amax() < 1e-9);
    }

    #[test]
    fn regression_is_deterministic(seed in 0u64..500) {
        let wt = orthonormalize_rows(&random(2, 40, seed));
        let a = random(6, 40, seed + 3);
        let x = sketched_regression_right(&a, &wt, 0.5, Some(8), seed).unwrap();
        let y = sketched_regression_right(&a, &wt, 0.5, Some(8), seed).unwrap();
        prop_assert_eq!(x.x, y.x);
        prop_assert_eq!(x.sketch, y.sketch);
    }
}
