use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;

use super::*;
use crate::metricspace::{gen_clustered, gen_linf_hard, gen_zero, HardInstanceSpec};
use crate::sketchlin::{tail_energy, LowRankFactors};
use crate::{DistanceOracle, Error, MatrixAccess, Metric, PointSet};

fn clustered(n: usize, metric: Metric, seed: u64) -> Arc<DistanceOracle> {
    let (p, q) = gen_clustered(n, n, 5, 3, 0.05, seed).unwrap();
    let o = if metric == Metric::SqEuclidean {
        DistanceOracle::symmetric(Arc::new(p), metric)
    } else {
        DistanceOracle::from_points(Arc::new(p), Arc::new(q), metric)
    };
    Arc::new(o.unwrap())
}

fn all_algorithms() -> [Algorithm; 3] {
    [Algorithm::TwoLevel, Algorithm::Recursive, Algorithm::SvdOracle]
}

#[test]
fn zero_oracle_gives_zero_factors() {
    let (p, q) = gen_zero(30, 20, 2).unwrap();
    let o = Arc::new(DistanceOracle::from_points(Arc::new(p), Arc::new(q), Metric::Euclidean).unwrap());
    for algo in all_algorithms() {
        let rep = run_algorithm(algo, &Arc::new(o.fresh()), &LraConfig::desk(3, 0.5)).unwrap();
        assert_eq!(rep.factors.rank_bound(), 3);
        assert!(rep.factors.product(usize::MAX).unwrap().iter().all(|&v| v == 0.0), "{algo}");
        let r = evaluate_residual(&o, &rep.factors, 3, usize::MAX).unwrap();
        assert_eq!(r.approx_sq, 0.0);
        assert!(r.passes(0.5));
    }
}

#[test]
fn all_ones_is_recovered() {
    let o = Arc::new(DistanceOracle::from_matrix(DMatrix::from_element(40, 30, 1.0)).unwrap());
    for algo in all_algorithms() {
        let rep = run_algorithm(algo, &Arc::new(o.fresh()), &LraConfig::desk(1, 0.5).with_seed(2)).unwrap();
        let r = evaluate_residual(&o, &rep.factors, 1, usize::MAX).unwrap();
        assert!(r.approx_sq < 1e-18, "{algo}: {}", r.approx_sq);
    }
}

#[test]
fn paper_profile_degrades_to_full_reads_at_small_n() {
    let o = clustered(64, Metric::Euclidean, 3);
    let rep = additive_lra_two_level(o.clone(), &LraConfig::new(2, 0.5)).unwrap();
    assert!(rep.stages.iter().all(|s| s.identity));
    let r = evaluate_residual(&o, &rep.factors, 2, usize::MAX).unwrap();
    assert!(r.passes(0.5));
}

#[test]
fn drivers_meet_additive_bound() {
    for metric in [Metric::Euclidean, Metric::L1, Metric::Linf] {
        let o = clustered(200, metric, 4);
        let a = o.dense_uncounted();
        let reference = Reference::compute(&a, 5);
        for algo in [Algorithm::TwoLevel, Algorithm::Recursive] {
            let rep = run_algorithm(algo, &Arc::new(o.fresh()), &LraConfig::desk(5, 0.5).with_seed(1)).unwrap();
            let r = reference.residual(&a, &rep.factors).unwrap();
            assert!(r.passes(0.5), "{algo} {metric:?}: {}", r.relative_to_frob);
            assert!(rep.entries_read < (200 * 200) as u64);
            // Orthonormal columns, zero-padded up to k.
            let g = rep.factors.left.transpose() * &rep.factors.left;
            let w = g.nrows();
            let width = (0..w).filter(|&i| g[(i, i)] > 0.5).count();
            let id = DMatrix::from_fn(w, w, |i, j| if i == j && i < width { 1.0 } else { 0.0 });
            assert_eq!(w, 5);
            assert!((g - id).amax() < 1e-9);
        }
    }
}

#[test]
fn entries_read_matches_audit() {
    let base = clustered(120, Metric::L1, 5);
    for algo in [Algorithm::TwoLevel, Algorithm::Recursive] {
        let o = Arc::new(base.fresh().with_audit());
        let rep = run_algorithm(algo, &o, &LraConfig::desk(3, 0.5)).unwrap();
        assert_eq!(rep.entries_read, o.audited_reads().unwrap() as u64);
    }
}

#[test]
fn runs_are_deterministic() {
    let base = clustered(100, Metric::Euclidean, 6);
    for algo in [Algorithm::TwoLevel, Algorithm::Recursive, Algorithm::Bicriteria] {
        let base = if algo == Algorithm::Bicriteria { clustered(100, Metric::SqEuclidean, 6) } else { base.clone() };
        let cfg = LraConfig::desk(3, 0.5).with_seed(9);
        let a = run_algorithm(algo, &Arc::new(base.fresh()), &cfg).unwrap();
        let b = run_algorithm(algo, &Arc::new(base.fresh()), &cfg).unwrap();
        assert_eq!(a.factors, b.factors, "{algo}");
        assert_eq!(a.entries_read, b.entries_read);
    }
}

#[test]
fn repeated_runs_count_validation_reads() {
    let base = clustered(100, Metric::Euclidean, 7);
    let o = Arc::new(base.fresh().with_audit());
    let rep = run_repeated(Algorithm::TwoLevel, &o, &LraConfig::desk(2, 0.5), 3).unwrap();
    assert_eq!(rep.entries_read, o.audited_reads().unwrap() as u64);
    assert!(run_repeated(Algorithm::TwoLevel, &o, &LraConfig::desk(2, 0.5), 0).is_err());
}

#[test]
fn config_validation() {
    let o = clustered(20, Metric::Euclidean, 1);
    let bad = [
        LraConfig::new(0, 0.5),
        LraConfig::new(21, 0.5),
        LraConfig::new(2, 1.0),
        LraConfig { depth_2r: 3, ..LraConfig::new(2, 0.5) },
        LraConfig { gamma: 0.7, ..LraConfig::new(2, 0.5) },
        LraConfig { b1: Some(0), ..LraConfig::new(2, 0.5) },
    ];
    for cfg in bad {
        assert!(matches!(additive_lra_two_level(o.clone(), &cfg), Err(Error::InvalidParameter(_))));
    }
    assert_eq!(o.entries_read(), 0);
}

#[test]
fn recursive_bottom_cap_is_a_parameter_error() {
    let o = clustered(60, Metric::Euclidean, 2);
    let cfg = LraConfig { dense_cap: 10, ..LraConfig::new(2, 0.5) };
    assert!(matches!(additive_lra_recursive(o, &cfg), Err(Error::InvalidParameter(_))));
}

#[test]
fn algorithm_names_round_trip() {
    for algo in [Algorithm::TwoLevel, Algorithm::Recursive, Algorithm::Bicriteria, Algorithm::SvdOracle] {
        assert_eq!(algo.name().parse::<Algorithm>().unwrap(), algo);
        assert_eq!(serde_json::to_string(&algo).unwrap(), format!("\"{}\"", algo.name()));
    }
    assert!("fast".parse::<Algorithm>().is_err());
}

#[test]
fn sq_euclidean_decomposition() {
    let pts = PointSet::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]], "p").unwrap();
    let o = DistanceOracle::symmetric(Arc::new(pts), Metric::SqEuclidean).unwrap();
    let a = o.dense_uncounted();
    let parts = decompose_sq_euclidean(&o).unwrap();
    assert_eq!(parts.norms.as_slice(), &[0.0, 1.0, 4.0, 2.0]);
    let b = crate::pcp::materialize(&parts.psd, usize::MAX).unwrap();
    // Gram matrix of the points (first point already at the origin).
    let expected = DMatrix::from_row_slice(4, 4, &[
        0.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 1.0,
        0.0, 0.0, 4.0, 2.0,
        0.0, 1.0, 2.0, 2.0,
    ]);
    assert_eq!(b, expected);
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(parts.norms[i] + parts.norms[j] - 2.0 * b[(i, j)], a[(i, j)]);
        }
    }
    assert!(b.clone().symmetric_eigenvalues().iter().all(|&l| l > -1e-12));
}

#[test]
fn decomposition_rejects_other_oracles() {
    let o = clustered(10, Metric::Euclidean, 1);
    assert!(matches!(decompose_sq_euclidean(&o), Err(Error::Contract(_))));
    let rect = DistanceOracle::from_matrix(DMatrix::from_element(3, 4, 1.0)).unwrap();
    assert!(decompose_sq_euclidean(&rect).is_err());
}

#[test]
fn psd_low_rank_is_reproduced() {
    let g = DMatrix::from_row_slice(6, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, -1.0, 0.5, 0.5, -1.0, 3.0]);
    let b = &g * g.transpose();
    let diag: Vec<f64> = b.diagonal().iter().copied().collect();
    let f = psd_sublinear_lra(&b, &diag, 2, 0.5, 3).unwrap();
    assert!((f.product(usize::MAX).unwrap() - &b).amax() < 1e-9);
    let zero = DMatrix::<f64>::zeros(4, 4);
    assert_eq!(psd_sublinear_lra(&zero, &[0.0; 4], 2, 0.5, 0).unwrap().rank_bound(), 0);
}

#[test]
fn bicriteria_width_and_error() {
    let o = clustered(120, Metric::SqEuclidean, 8);
    let a = o.dense_uncounted();
    let out = euclidean_bicriteria(&o, &LraConfig::desk(3, 0.5)).unwrap();
    assert!(out.w.ncols() <= 7);
    let g = out.w.transpose() * &out.w;
    assert!((g - DMatrix::<f64>::identity(out.w.ncols(), out.w.ncols())).amax() < 1e-9);
    let proj = (&a - &out.w * (out.w.transpose() * &a)).norm_squared();
    assert!(proj <= 1.5 * tail_energy(&a, 3));
    assert_eq!(out.report.algorithm, Algorithm::Bicriteria);
    assert!(euclidean_bicriteria(&o, &LraConfig::desk(119, 0.5)).is_err());
}

#[test]
fn residual_examples() {
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]));
    let reference = Reference::compute(&a, 2);
    assert_eq!(reference.frob_sq, 14.0);
    assert!((reference.tail_sq - 1.0).abs() < 1e-12);
    let zero = LowRankFactors::zeros(3, 3, 2);
    let r = reference.residual(&a, &zero).unwrap();
    assert!((r.additive - 13.0).abs() < 1e-12);
    assert!((r.relative - 14.0).abs() < 1e-12);
    assert!(!r.passes(0.9));
    assert!(r.passes(13.0 / 14.0));
    assert!(reference.residual(&a, &LowRankFactors::zeros(3, 4, 2)).is_err());
}

#[test]
fn hard_instance_has_infinite_relative_error_for_missed_entry() {
    let spec = HardInstanceSpec { n: 8, special_row: 3, sign: 1, seed: 1 };
    let o = gen_linf_hard(spec).unwrap();
    // The all-ones rank-1 guess misses the special entry.
    let guess = LowRankFactors::new(DMatrix::from_element(8, 1, 1.0), DMatrix::from_element(1, 8, 1.0)).unwrap();
    let r = evaluate_residual(&o, &guess, 2, usize::MAX).unwrap();
    assert_eq!(r.reference.tail_sq, 0.0);
    assert_eq!(r.approx_sq, 1.0);
    assert!(r.relative.is_infinite());
    assert_eq!(o.entries_read(), 0);
    assert!(matches!(evaluate_residual(&o, &guess, 2, 63), Err(Error::DenseCapExceeded { .. })));
}

#[test]
fn factors_round_trip() {
    let f = LowRankFactors::new(
        DMatrix::from_fn(5, 2, |i, j| i as f64 * 0.1 - j as f64 / 3.0),
        DMatrix::from_fn(2, 4, |i, j| (i * 4 + j) as f64 * 1e-7),
    )
    .unwrap();
    let mut buf = Vec::new();
    write_factors(&mut buf, &f).unwrap();
    let back = read_factors(buf.as_slice()).unwrap();
    assert_eq!(back, f);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.txt");
    save_factors(&path, &f).unwrap();
    assert_eq!(load_factors(&path).unwrap(), f);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn additive_guarantee_holds(seed in 0u64..1000, k in 1usize..4, algo in prop::sample::select(vec![Algorithm::TwoLevel, Algorithm::Recursive])) {
        let o = clustered(80, Metric::Euclidean, seed);
        let a = o.dense_uncounted();
        let rep = run_algorithm(algo, &o, &LraConfig::desk(k, 0.5).with_seed(seed)).unwrap();
        prop_assert_eq!(rep.factors.rank_bound(), k);
        prop_assert_eq!((rep.factors.rows(), rep.factors.cols()), (80, 80));
        let r = Reference::compute(&a, k).residual(&a, &rep.factors).unwrap();
        prop_assert!(r.approx_sq >= r.reference.tail_sq * (1.0 - 1e-9));
        prop_assert!(r.passes(0.5));
    }
}
