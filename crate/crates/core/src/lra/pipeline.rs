use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use super::config::{Algorithm, LraConfig};
use super::euclidean::euclidean_bicriteria;
use super::residual::Residual;
use crate::metricspace::MatrixAccess;
use crate::normest::{estimate_col_norms, estimate_norms_weighted, Side};
use crate::pcp::{
    build_distribution, materialize, pcp_sample_size, sample_column_pcp, sample_row_pcp,
    SampledSketch, SketchView,
};
use crate::rng::{derive_seed, stream};
use crate::sketchlin::{
    input_sparsity_lra_with, orthonormalize, orthonormalize_rows, sketched_regression_left,
    sketched_regression_right, svd_k, truncated_svd, LowRankFactors,
};
use crate::{DistanceOracle, Error, Result};

/// Shape of one intermediate matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageInfo {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// The sampling stage kept everything (sample size reached the dimension).
    pub identity: bool,
    pub budget: usize,
    pub classes: usize,
}

#[derive(Debug, Clone)]
pub struct LraReport {
    pub algorithm: Algorithm,
    pub factors: LowRankFactors,
    pub entries_read: u64,
    pub wall_ms: f64,
    pub config: LraConfig,
    pub stages: Vec<StageInfo>,
    pub residual: Option<Residual>,
}

// Stage tags for seed derivation.
const T_COLEST: u64 = 1;
const T_COLPCP: u64 = 2;
const T_ROWEST: u64 = 3;
const T_ROWPCP: u64 = 4;
const T_CORE: u64 = 5;
const T_REG: u64 = 6;

/// One sampling level: estimate norms along `side` of `cur` and draw a sketch.
#[allow(clippy::too_many_arguments)]
fn sample_level(
    cur: &SketchView,
    side: Side,
    b: usize,
    reps: usize,
    t: usize,
    cfg: &LraConfig,
    seed: u64,
    name: String,
    stages: &mut Vec<StageInfo>,
) -> Result<SketchView> {
    let count = match side {
        Side::Rows => cur.rows(),
        Side::Columns => cur.cols(),
    };
    let sketch = if t >= count {
        SampledSketch::identity(side, count)
    } else {
        let est = estimate_norms_weighted(cur, side, b, reps, derive_seed(seed, &[1]))?;
        let dist = build_distribution(&est, cfg.floor_mix)?;
        match side {
            Side::Columns => sample_column_pcp(cur, &dist, t, cfg.eps, derive_seed(seed, &[2]))?,
            Side::Rows => sample_row_pcp(cur, &dist, t, cfg.eps, derive_seed(seed, &[2]))?,
        }
    };
    let next = cur.compose(&sketch)?;
    stages.push(StageInfo {
        name,
        rows: next.rows(),
        cols: next.cols(),
        identity: t >= count,
        budget: b,
        classes: sketch.class_count(),
    });
    Ok(next)
}

fn finish(
    algorithm: Algorithm,
    factors: LowRankFactors,
    root: &dyn MatrixAccess,
    before: u64,
    start: Instant,
    cfg: &LraConfig,
    stages: Vec<StageInfo>,
) -> LraReport {
    LraReport {
        algorithm,
        factors: factors.padded(cfg.k),
        entries_read: root.entries_read() - before,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        config: cfg.clone(),
        stages,
        residual: None,
    }
}

/// Column sketch, weighted row sketch, input-sparsity LRA on the core and two
/// sketched regressions. Returns `M` (`m x k`, orthonormal columns) and `N^T`.
pub fn additive_lra_two_level(a: Arc<dyn MatrixAccess>, cfg: &LraConfig) -> Result<LraReport> {
    let start = Instant::now();
    let (m, n) = (a.rows(), a.cols());
    cfg.validate(m, n)?;
    let before = a.entries_read();
    let seed = cfg.seed;
    let delta = cfg.delta.unwrap_or(0.1);
    let mut stages = Vec::new();
    let root = SketchView::root(a.clone());

    // Column norms of A with budget b1 per column, then the column sketch AS.
    let b1 = cfg.b1.unwrap_or_else(|| cfg.two_level_budget(n)).min(m);
    let s1 = pcp_sample_size(m, cfg.k, b1, cfg.eps, delta, cfg.c_pcp);
    let col_sketch = if s1 >= n {
        SampledSketch::identity(Side::Columns, n)
    } else {
        let est = estimate_col_norms(&*a, b1, cfg.reps(n), derive_seed(seed, &[T_COLEST]))?;
        let dist = build_distribution(&est, cfg.floor_mix)?;
        sample_column_pcp(&root, &dist, s1, cfg.eps, derive_seed(seed, &[T_COLPCP]))?
    };
    let a_s = root.compose(&col_sketch)?;
    stages.push(StageInfo {
        name: "AS".into(),
        rows: a_s.rows(),
        cols: a_s.cols(),
        identity: s1 >= n,
        budget: b1,
        classes: col_sketch.class_count(),
    });

    // Row norms of AS per weight class, then the row sketch TAS.
    let b2 = cfg.b2.unwrap_or_else(|| cfg.two_level_budget(m)).min(a_s.cols());
    let s2 = pcp_sample_size(n, cfg.k, b2, cfg.eps, delta, cfg.c_pcp);
    let row_sketch = if s2 >= m {
        SampledSketch::identity(Side::Rows, m)
    } else {
        let est = estimate_norms_weighted(&a_s, Side::Rows, b2, cfg.reps(m), derive_seed(seed, &[T_ROWEST]))?;
        let dist = build_distribution(&est, cfg.floor_mix)?;
        sample_row_pcp(&a_s, &dist, s2, cfg.eps, derive_seed(seed, &[T_ROWPCP]))?
    };
    let tas_view = a_s.compose(&row_sketch)?;
    stages.push(StageInfo {
        name: "TAS".into(),
        rows: tas_view.rows(),
        cols: tas_view.cols(),
        identity: s2 >= m,
        budget: b2,
        classes: row_sketch.class_count(),
    });
    let tas = materialize(&tas_view, cfg.dense_cap)?;

    let k_core = cfg.k.min(tas.nrows()).min(tas.ncols());
    let core = input_sparsity_lra_with(&tas, k_core, cfg.eps, cfg.c_cw, derive_seed(seed, &[T_CORE]))?;
    let wt = core.right;
    if wt.nrows() == 0 {
        return Ok(finish(Algorithm::TwoLevel, LowRankFactors::zeros(m, n, 0), &*a, before, start, cfg, stages));
    }

    let x_as = sketched_regression_right(&a_s, &wt, cfg.eps, cfg.s_reg, derive_seed(seed, &[T_REG, 0]))?.x;
    let (p, _) = orthonormalize(&x_as);
    if p.ncols() == 0 {
        return Ok(finish(Algorithm::TwoLevel, LowRankFactors::zeros(m, n, 0), &*a, before, start, cfg, stages));
    }
    let x_a = sketched_regression_left(&*a, &p, cfg.eps, cfg.s_reg, derive_seed(seed, &[T_REG, 1]))?.x;
    let factors = LowRankFactors::new(p, x_a)?;
    Ok(finish(Algorithm::TwoLevel, factors, &*a, before, start, cfg, stages))
}

/// Alternating column (odd levels) and row (even levels) sketches down to a
/// small core, exact SVD there, then alternating sketched regressions back up.
pub fn additive_lra_recursive(a: Arc<dyn MatrixAccess>, cfg: &LraConfig) -> Result<LraReport> {
    let start = Instant::now();
    let (m, n) = (a.rows(), a.cols());
    cfg.validate(m, n)?;
    let before = a.entries_read();
    let seed = cfg.seed;
    let big_n = m.max(n).max(2) as f64;
    let delta = cfg.delta.unwrap_or(big_n.powi(-4));
    let depth = cfg.depth_2r;
    let mut stages = Vec::new();

    // Column estimation samples along columns (root length m), rows along rows (root length n).
    let b_col = cfg.recursive_budget(m);
    let b_row = cfg.recursive_budget(n);
    let mut views = vec![SketchView::root(a.clone())];
    for level in 1..=depth {
        let cur = views.last().expect("root view");
        let lseed = derive_seed(seed, &[0x7ec, level as u64]);
        let next = if level % 2 == 1 {
            let len = cur.rows();
            let b = b_col.min(len);
            let t = pcp_sample_size(len, cfg.k, b, cfg.eps, delta, cfg.c_pcp);
            sample_level(cur, Side::Columns, b, cfg.reps(cur.cols()), t, cfg, lseed, format!("A({level})"), &mut stages)?
        } else {
            let len = cur.cols();
            let b = b_row.min(len);
            let t = pcp_sample_size(len, cfg.k, b, cfg.eps, delta, cfg.c_pcp);
            sample_level(cur, Side::Rows, b, cfg.reps(cur.rows()), t, cfg, lseed, format!("A({level})"), &mut stages)?
        };
        views.push(next);
    }

    let bottom_view = &views[depth];
    let bottom = materialize(bottom_view, cfg.dense_cap).map_err(|e| match e {
        Error::DenseCapExceeded { entries, cap } => Error::param(format!(
            "bottom sketch has {entries} entries, above the dense cap of {cap}; \
             increase depth_2r or the norm-estimation budgets"
        )),
        other => other,
    })?;
    let k_core = cfg.k.min(bottom.nrows()).min(bottom.ncols());
    let top = svd_k(&bottom, k_core)?;
    let mut vt: DMatrix<f64> = top.vt;
    let eps_r = cfg.eps / depth as f64;

    let mut level = depth - 1;
    loop {
        if vt.nrows() == 0 {
            return Ok(finish(Algorithm::Recursive, LowRankFactors::zeros(m, n, 0), &*a, before, start, cfg, stages));
        }
        let rseed = derive_seed(seed, &[T_REG, level as u64]);
        let x = sketched_regression_right(&views[level], &vt, eps_r, cfg.s_reg, derive_seed(rseed, &[0]))?.x;
        let (u, _) = orthonormalize(&x);
        if u.ncols() == 0 {
            return Ok(finish(Algorithm::Recursive, LowRankFactors::zeros(m, n, 0), &*a, before, start, cfg, stages));
        }
        let y = sketched_regression_left(&views[level - 1], &u, eps_r, cfg.s_reg, derive_seed(rseed, &[1]))?.x;
        if level == 1 {
            let factors = LowRankFactors::new(u, y)?;
            return Ok(finish(Algorithm::Recursive, factors, &*a, before, start, cfg, stages));
        }
        vt = orthonormalize_rows(&y);
        level -= 2;
    }
}

/// Reads the whole matrix through the oracle and returns its truncated SVD.
pub fn svd_oracle(a: Arc<dyn MatrixAccess>, cfg: &LraConfig) -> Result<LraReport> {
    let start = Instant::now();
    let (m, n) = (a.rows(), a.cols());
    if cfg.k > m.min(n) {
        return Err(Error::param(format!("k must be at most {}", m.min(n))));
    }
    let before = a.entries_read();
    let dense = materialize(&*a, cfg.dense_cap)?;
    let factors = truncated_svd(&dense, cfg.k)?;
    Ok(finish(Algorithm::SvdOracle, factors, &*a, before, start, cfg, Vec::new()))
}

/// Runs `algorithm` once against `oracle` (whose counter is not reset).
pub fn run_algorithm(
    algorithm: Algorithm,
    oracle: &Arc<DistanceOracle>,
    cfg: &LraConfig,
) -> Result<LraReport> {
    let dynamic: Arc<dyn MatrixAccess> = oracle.clone();
    match algorithm {
        Algorithm::TwoLevel => additive_lra_two_level(dynamic, cfg),
        Algorithm::Recursive => additive_lra_recursive(dynamic, cfg),
        Algorithm::SvdOracle => svd_oracle(dynamic, cfg),
        Algorithm::Bicriteria => Ok(euclidean_bicriteria(oracle, cfg)?.report),
    }
}

/// Runs the pipeline `repeat` times with derived seeds and keeps the run with
/// the smallest squared error on `4 s2` uniformly sampled validation entries.
/// All runs and the validation reads share the oracle, so `entries_read` is
/// the number of distinct entries touched by the whole procedure.
pub fn run_repeated(
    algorithm: Algorithm,
    oracle: &Arc<DistanceOracle>,
    cfg: &LraConfig,
    repeat: usize,
) -> Result<LraReport> {
    if repeat == 0 {
        return Err(Error::param("repeat must be at least 1"));
    }
    if repeat == 1 {
        return run_algorithm(algorithm, oracle, cfg);
    }
    let start = Instant::now();
    let before = oracle.entries_read();
    let (m, n) = (oracle.rows(), oracle.cols());
    let b2 = cfg.b2.unwrap_or_else(|| cfg.two_level_budget(m));
    let s2 = pcp_sample_size(n, cfg.k, b2, cfg.eps, cfg.delta.unwrap_or(0.1), cfg.c_pcp).min(m);
    let t_val = 4 * s2;
    let mut rng = stream(cfg.seed, &[0x7a1d]);
    let mut val = Vec::with_capacity(t_val);
    for _ in 0..t_val {
        let (i, j) = (rng.random_range(0..m), rng.random_range(0..n));
        val.push((i, j, oracle.entry(i, j)?));
    }
    let mut best: Option<(f64, LraReport)> = None;
    for r in 0..repeat {
        let run_cfg = LraConfig {
            seed: derive_seed(cfg.seed, &[0x4e9, r as u64]),
            ..cfg.clone()
        };
        let rep = run_algorithm(algorithm, oracle, &run_cfg)?;
        let f = &rep.factors;
        let score: f64 = val
            .iter()
            .map(|&(i, j, v)| {
                let approx = f.left.row(i).dot(&f.right.column(j).transpose());
                (v - approx).powi(2)
            })
            .sum();
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, rep));
        }
    }
    let (_, mut rep) = best.expect("repeat >= 1");
    rep.entries_read = oracle.entries_read() - before;
    rep.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    rep.config = cfg.clone();
    Ok(rep)
}
