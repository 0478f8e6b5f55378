use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::config::{Algorithm, LraConfig};
use super::pipeline::LraReport;
use crate::metricspace::{MatrixAccess, Metric, Source};
use crate::rng::{derive_seed, stream};
use crate::sketchlin::{orthonormalize, sketched_regression_left, svd_k, LowRankFactors};
use crate::{DistanceOracle, Error, Result};

/// `B[i][j] = (a_i + a_j - A[i][j]) / 2`, evaluated on demand.
///
/// With the first point moved to the origin, `a_i = ||x_i||^2 = A[0][i]` and
/// `B` is the Gram matrix of the shifted points. Off-diagonal entries read one
/// entry of `A`; the diagonal is `a_i` because `A[i][i] = 0`.
pub struct PsdView<'a> {
    a: &'a dyn MatrixAccess,
    norms: Arc<Vec<f64>>,
}

impl MatrixAccess for PsdView<'_> {
    fn rows(&self) -> usize {
        self.norms.len()
    }

    fn cols(&self) -> usize {
        self.norms.len()
    }

    fn entry(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i, j)?;
        if i == j {
            return Ok(self.norms[i]);
        }
        Ok(0.5 * (self.norms[i] + self.norms[j] - self.a.entry(i, j)?))
    }

    fn entries_read(&self) -> u64 {
        self.a.entries_read()
    }
}

impl PsdView<'_> {
    pub fn diagonal(&self) -> &[f64] {
        &self.norms
    }
}

/// `A = a 1^T + 1 a^T - 2B` for a squared Euclidean matrix with `P = Q`.
pub struct SqEuclideanParts<'a> {
    /// Squared norms after the origin shift (`a1 = a2 = a`).
    pub norms: Arc<Vec<f64>>,
    pub psd: PsdView<'a>,
}

/// Reads row 0 of `oracle` and returns the rank-one parts and the PSD view.
pub fn decompose_sq_euclidean(oracle: &DistanceOracle) -> Result<SqEuclideanParts<'_>> {
    if oracle.rows() != oracle.cols() {
        return Err(Error::contract("squared Euclidean decomposition needs a square matrix"));
    }
    match oracle.source() {
        Source::Points { metric: Metric::SqEuclidean, .. } if oracle.structurally_symmetric() => {}
        Source::Points { .. } => {
            return Err(Error::contract(
                "squared Euclidean decomposition needs a SqEuclidean oracle with P = Q",
            ))
        }
        Source::Explicit(_) if oracle.structurally_symmetric() => {}
        Source::Explicit(_) => {
            return Err(Error::contract("squared Euclidean decomposition needs a symmetric matrix"))
        }
    }
    let norms = Arc::new(oracle.read_row(0)?);
    Ok(SqEuclideanParts {
        norms: norms.clone(),
        psd: PsdView { a: oracle, norms },
    })
}

/// Rank-`k` approximation of a PSD matrix from a subset of its entries.
pub trait PsdLowRank: Send + Sync {
    fn approximate(
        &self,
        b: &dyn MatrixAccess,
        diagonal: &[f64],
        k: usize,
        eps: f64,
        s_reg: Option<usize>,
        seed: u64,
    ) -> Result<LowRankFactors>;
}

/// Nystrom approximation from columns sampled proportionally to the diagonal,
/// truncated to rank `k` and refined by one sketched regression.
///
/// Samples `ceil(c_psd k / eps * ln n)` columns with replacement.
#[derive(Debug, Clone, Copy)]
pub struct DiagonalNystrom {
    pub c_psd: f64,
}

impl Default for DiagonalNystrom {
    fn default() -> Self {
        Self { c_psd: 1.0 }
    }
}

impl PsdLowRank for DiagonalNystrom {
    fn approximate(
        &self,
        b: &dyn MatrixAccess,
        diagonal: &[f64],
        k: usize,
        eps: f64,
        s_reg: Option<usize>,
        seed: u64,
    ) -> Result<LowRankFactors> {
        let n = b.rows();
        if k == 0 || k > n {
            return Err(Error::param(format!("rank {k} must lie in 1..={n}")));
        }
        if diagonal.iter().all(|&d| d <= 0.0) {
            return Ok(LowRankFactors::zeros(n, n, 0));
        }
        let c = (self.c_psd * k as f64 / eps * (n.max(2) as f64).ln()).ceil() as usize;
        let weights: Vec<f64> = diagonal.iter().map(|d| d.max(0.0)).collect();
        let table = WeightedIndex::new(&weights).map_err(|_| Error::DegenerateDistribution)?;
        let mut rng = stream(seed, &[0x4157]);
        let mut cols: Vec<usize> = (0..c).map(|_| table.sample(&mut rng)).collect();
        cols.sort_unstable();
        cols.dedup();

        let read: Vec<Vec<f64>> = cols.iter().map(|&j| b.read_column(j)).collect::<Result<_>>()?;
        let cmat = DMatrix::from_fn(n, cols.len(), |i, j| read[j][i]);
        let w = DMatrix::from_fn(cols.len(), cols.len(), |i, j| cmat[(cols[i], j)]);
        let eig = SymmetricEigen::new(w);
        let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&i| eig.eigenvalues[i] > 1e-10 * lmax)
            .collect();
        if keep.is_empty() {
            return Ok(LowRankFactors::zeros(n, n, 0));
        }
        // B ~ G G^T with G = C Q Lambda^{-1/2}.
        let mut basis = DMatrix::zeros(cols.len(), keep.len());
        for (c, &i) in keep.iter().enumerate() {
            let s = 1.0 / eig.eigenvalues[i].sqrt();
            basis.set_column(c, &(eig.eigenvectors.column(i) * s));
        }
        let g = &cmat * basis;
        let r = k.min(g.ncols());
        let uk = svd_k(&g, r)?.u;
        let (uk, _) = orthonormalize(&uk);
        if uk.ncols() == 0 {
            return Ok(LowRankFactors::zeros(n, n, 0));
        }
        let x = sketched_regression_left(b, &uk, eps, s_reg, derive_seed(seed, &[0x4e6]))?.x;
        LowRankFactors::new(uk, x)
    }
}

/// Default PSD approximation.
pub fn psd_sublinear_lra(
    b: &dyn MatrixAccess,
    diagonal: &[f64],
    k: usize,
    eps: f64,
    seed: u64,
) -> Result<LowRankFactors> {
    DiagonalNystrom::default().approximate(b, diagonal, k, eps, None, seed)
}

#[derive(Debug, Clone)]
pub struct BicriteriaOutput {
    /// Orthonormal columns, at most `k + 4` of them.
    pub w: DMatrix<f64>,
    /// `W X` with `X` from a sketched regression of `A` onto `W`.
    pub report: LraReport,
}

/// Rank `k + 4` approximation of a squared Euclidean distance matrix.
///
/// The PSD part is approximated at rank `k + 2`; its column space is joined with
/// the all-ones vector and the squared-norm vector, the row spaces of the two
/// rank-one parts.
pub fn euclidean_bicriteria(oracle: &DistanceOracle, cfg: &LraConfig) -> Result<BicriteriaOutput> {
    euclidean_bicriteria_with(oracle, cfg, &DiagonalNystrom { c_psd: cfg.c_psd })
}

pub fn euclidean_bicriteria_with(
    oracle: &DistanceOracle,
    cfg: &LraConfig,
    psd: &dyn PsdLowRank,
) -> Result<BicriteriaOutput> {
    let start = Instant::now();
    let n = oracle.rows();
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1), got {}", cfg.eps)));
    }
    if cfg.k == 0 || cfg.k + 2 > n {
        return Err(Error::param(format!("k must lie in 1..={}", n.saturating_sub(2))));
    }
    let before = oracle.entries_read();
    let parts = decompose_sq_euclidean(oracle)?;
    let f = psd.approximate(&parts.psd, parts.psd.diagonal(), cfg.k + 2, cfg.eps, cfg.s_reg, cfg.seed)?;
    let (v, _) = orthonormalize(&f.left);
    let w0 = v.ncols();
    let mut stacked = v.resize_horizontally(w0 + 2, 0.0);
    for i in 0..n {
        stacked[(i, w0)] = 1.0;
        stacked[(i, w0 + 1)] = parts.norms[i];
    }
    let (w, _) = orthonormalize(&stacked);
    let x = sketched_regression_left(oracle, &w, cfg.eps, cfg.s_reg, derive_seed(cfg.seed, &[0xb1c]))?.x;
    let factors = LowRankFactors::new(w.clone(), x)?;
    let report = LraReport {
        algorithm: Algorithm::Bicriteria,
        factors,
        entries_read: oracle.entries_read() - before,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        config: cfg.clone(),
        stages: Vec::new(),
        residual: None,
    };
    Ok(BicriteriaOutput { w, report })
}
