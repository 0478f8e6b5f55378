//! Small end-to-end property checks, one per module, for the `verify` subcommand.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::lra::{
    additive_lra_recursive, additive_lra_two_level, decompose_sq_euclidean, euclidean_bicriteria,
    LraConfig, Reference,
};
use crate::metricspace::{check_approx_triangle, gen_clustered, HardInstanceSpec, TriangleCheck};
use crate::normest::estimate_row_norms;
use crate::pcp::{build_distribution, sample_column_pcp, SketchView};
use crate::sketchlin::{input_sparsity_lra, sketched_regression_right, singular_values, tail_energy};
use crate::{DistanceOracle, Metric, Result};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn clustered(m: usize, n: usize, metric: Metric, seed: u64) -> Result<DistanceOracle> {
    let (p, q) = gen_clustered(m, n, 4, 3, 0.05, seed)?;
    if metric == Metric::SqEuclidean {
        DistanceOracle::symmetric(Arc::new(p), metric)
    } else {
        DistanceOracle::from_points(Arc::new(p), Arc::new(q), metric)
    }
}

fn triangle(seed: u64) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for metric in [Metric::Euclidean, Metric::L1, Metric::Linf] {
        let o = clustered(40, 30, metric, seed)?;
        worst = worst.max(check_approx_triangle(&o, &TriangleCheck::sampled(0.0, 400, seed))?.worst_ratio);
    }
    Ok((worst <= 1.0 + 1e-9, format!("worst ratio {worst:.6}")))
}

fn norm_ratio(seed: u64) -> Result<(bool, String)> {
    let o = clustered(128, 128, Metric::Euclidean, seed)?;
    let a = o.dense_uncounted();
    let est = estimate_row_norms(&o, 16, crate::normest::default_repetitions(128), seed)?;
    let worst = (0..128)
        .map(|i| {
            let t = a.row(i).norm_squared();
            (est.values[i] / t).max(t / est.values[i])
        })
        .fold(0.0, f64::max);
    let bound = 40.0 * 128.0 / 16.0;
    Ok((worst <= bound, format!("worst ratio {worst:.3} vs bound {bound}")))
}

fn pcp_mean(seed: u64) -> Result<(bool, String)> {
    let o = Arc::new(clustered(32, 32, Metric::Euclidean, seed)?);
    let a = o.dense_uncounted();
    let est = crate::normest::estimate_col_norms(&*o, 8, 5, seed)?;
    let dist = build_distribution(&est, 0.0)?;
    let view = SketchView::root(o.clone());
    let draws = 300;
    let mut total = 0.0;
    for d in 0..draws {
        let sk = sample_column_pcp(&view, &dist, 8, 0.5, seed + d)?;
        let c = view.compose(&sk)?.materialize(usize::MAX)?;
        total += c.norm_squared();
    }
    let ratio = total / draws as f64 / a.norm_squared();
    Ok(((ratio - 1.0).abs() < 0.1, format!("mean ||C||^2 / ||A||^2 = {ratio:.4}")))
}

fn sketch_kernels(seed: u64) -> Result<(bool, String)> {
    let mut rng = crate::rng::stream(seed, &[9]);
    let a = DMatrix::from_fn(60, 40, |_, _| rand::Rng::random::<f64>(&mut rng) - 0.5);
    let f = input_sparsity_lra(&a, 3, 0.5, seed)?;
    let lra_ratio = (&a - &f.left * &f.right).norm_squared() / tail_energy(&a, 3);
    let wt = crate::sketchlin::orthonormalize_rows(&DMatrix::from_fn(3, 40, |_, _| rand::Rng::random::<f64>(&mut rng) - 0.5));
    let sol = sketched_regression_right(&a, &wt, 0.5, None, seed)?;
    let exact = crate::sketchlin::lstsq(&wt.transpose(), &a.transpose())?.transpose();
    let reg_ratio = (&a - &sol.x * &wt).norm_squared() / (&a - exact * &wt).norm_squared();
    Ok((
        lra_ratio <= 1.5 && reg_ratio <= 1.5,
        format!("lra ratio {lra_ratio:.4}, regression ratio {reg_ratio:.4}"),
    ))
}

fn drivers(seed: u64) -> Result<(bool, String)> {
    let o = Arc::new(clustered(96, 96, Metric::Euclidean, seed)?);
    let a = o.dense_uncounted();
    let reference = Reference::compute(&a, 3);
    let cfg = LraConfig::desk(3, 0.5).with_seed(seed);
    let two = additive_lra_two_level(Arc::new(o.fresh()), &cfg)?;
    let rec = additive_lra_recursive(Arc::new(o.fresh()), &cfg)?;
    let r2 = reference.residual(&a, &two.factors)?;
    let r3 = reference.residual(&a, &rec.factors)?;
    Ok((
        r2.passes(0.5) && r3.passes(0.5),
        format!(
            "additive/||A||^2: two_level {:.2e}, recursive {:.2e}",
            r2.relative_to_frob, r3.relative_to_frob
        ),
    ))
}

fn bicriteria(seed: u64) -> Result<(bool, String)> {
    let o = clustered(60, 60, Metric::SqEuclidean, seed)?;
    let a = o.dense_uncounted();
    let parts = decompose_sq_euclidean(&o)?;
    let b = crate::pcp::materialize(&parts.psd, usize::MAX)?;
    let recon = DMatrix::from_fn(60, 60, |i, j| parts.norms[i] + parts.norms[j] - 2.0 * b[(i, j)]);
    let err = (&recon - &a).amax() / a.amax().max(f64::MIN_POSITIVE);
    let out = euclidean_bicriteria(&o.fresh(), &LraConfig::desk(3, 0.5).with_seed(seed))?;
    let proj = &a * &out.w * out.w.transpose();
    let ratio = (&a - proj).norm_squared() / tail_energy(&a, 3).max(f64::MIN_POSITIVE);
    Ok((
        err <= 1e-10 && out.w.ncols() <= 7 && ratio <= 2.25,
        format!("reconstruction {err:.1e}, width {}, ratio {ratio:.4}", out.w.ncols()),
    ))
}

fn hard_instance(seed: u64) -> Result<(bool, String)> {
    let spec = HardInstanceSpec { n: 64, special_row: 6, sign: 1, seed };
    let a = spec.matrix()?;
    let s = singular_values(&a);
    let ratio = s[2] / s[0];
    Ok((ratio < 1e-9 && s[1] > 1e-9 * s[0], format!("sigma3/sigma1 = {ratio:.1e}")))
}

fn accounting(seed: u64) -> Result<(bool, String)> {
    let o = Arc::new(clustered(80, 80, Metric::L1, seed)?.with_audit());
    let cfg = LraConfig::desk(2, 0.5).with_seed(seed);
    let r1 = additive_lra_two_level(o.clone(), &cfg)?;
    let audited = o.audited_reads().unwrap_or(0) as u64;
    let again = additive_lra_two_level(Arc::new(o.fresh()), &cfg)?;
    let same = r1.factors == again.factors && r1.entries_read == again.entries_read;
    Ok((
        r1.entries_read == audited && same,
        format!("counter {} vs audit {audited}, rerun identical: {same}", r1.entries_read),
    ))
}

/// Runs every check; the suite passes when all outcomes pass.
pub fn run_verify_suite(seed: u64) -> Vec<CheckOutcome> {
    let checks: [(&'static str, fn(u64) -> Result<(bool, String)>); 8] = [
        ("metricspace.triangle", triangle),
        ("normest.ratio", norm_ratio),
        ("pcp.unbiased", pcp_mean),
        ("sketchlin.oracles", sketch_kernels),
        ("lra.additive", drivers),
        ("lra.bicriteria", bicriteria),
        ("metricspace.hard_instance", hard_instance),
        ("metricspace.accounting", accounting),
    ];
    checks
        .iter()
        .map(|(name, f)| match f(seed) {
            Ok((pass, detail)) => CheckOutcome { name, pass, detail },
            Err(e) => CheckOutcome {
                name,
                pass: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}
