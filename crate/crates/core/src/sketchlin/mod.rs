//! Dense kernels and the randomized subroutines the drivers are built on.
//!
//! - [`truncated_svd`]: exact best rank-`k` approximation with a canonical sign.
//! - [`input_sparsity_lra`]: two-sided CountSketch low-rank approximation.
//! - [`sketched_regression_right`] / [`sketched_regression_left`]: least squares
//!   against an orthonormal factor, solved on a leverage-score column (row) sample.
//! - [`orthonormalize`]: rank-revealing Gram-Schmidt.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use crate::metricspace::{MatrixAccess, Transposed};
use crate::normest::Side;
use crate::rng::stream;
use crate::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;

/// A rank-`k` matrix kept as `left * right` (`m x k` times `k x n`).
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactors {
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
    pub singular_values: Option<Vec<f64>>,
}

impl LowRankFactors {
    pub fn new(left: DMatrix<f64>, right: DMatrix<f64>) -> Result<Self> {
        if left.ncols() != right.nrows() {
            return Err(Error::param(format!(
                "inner dimensions differ: left has {} columns, right has {} rows",
                left.ncols(),
                right.nrows()
            )));
        }
        Ok(Self {
            left,
            right,
            singular_values: None,
        })
    }

    pub fn zeros(m: usize, n: usize, k: usize) -> Self {
        Self {
            left: DMatrix::zeros(m, k),
            right: DMatrix::zeros(k, n),
            singular_values: None,
        }
    }

    pub fn rows(&self) -> usize {
        self.left.nrows()
    }

    pub fn cols(&self) -> usize {
        self.right.ncols()
    }

    pub fn rank_bound(&self) -> usize {
        self.left.ncols()
    }

    /// Pads with zero columns (left) and zero rows (right) up to width `k`.
    pub fn padded(mut self, k: usize) -> Self {
        let w = self.rank_bound();
        if w < k {
            self.left = self.left.resize_horizontally(k, 0.0);
            self.right = self.right.resize_vertically(k, 0.0);
        }
        self
    }

    /// The dense product, refused above `cap` entries.
    pub fn product(&self, cap: usize) -> Result<DMatrix<f64>> {
        check_cap(self.rows(), self.cols(), cap)?;
        Ok(&self.left * &self.right)
    }
}

pub(crate) fn check_cap(m: usize, n: usize, cap: usize) -> Result<()> {
    let entries = m.saturating_mul(n);
    if entries > cap {
        return Err(Error::DenseCapExceeded { entries, cap });
    }
    Ok(())
}

/// `U_k`, `sigma_k` (descending) and `V_k^T`.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub vt: DMatrix<f64>,
}

impl TruncatedSvd {
    pub fn factors(&self) -> LowRankFactors {
        let mut right = self.vt.clone();
        for (i, s) in self.sigma.iter().enumerate() {
            right.row_mut(i).scale_mut(*s);
        }
        LowRankFactors {
            left: self.u.clone(),
            right,
            singular_values: Some(self.sigma.clone()),
        }
    }
}

/// Rank-`k` SVD with singular values descending; each left singular vector is
/// flipped so its largest-magnitude entry is nonnegative.
pub fn svd_k(a: &DMatrix<f64>, k: usize) -> Result<TruncatedSvd> {
    let (m, n) = a.shape();
    if k > m.min(n) {
        return Err(Error::param(format!("rank {k} exceeds min({m}, {n})")));
    }
    if k == 0 {
        return Ok(TruncatedSvd {
            u: DMatrix::zeros(m, 0),
            sigma: Vec::new(),
            vt: DMatrix::zeros(0, n),
        });
    }
    let (u, sv, vt) = thin_svd(a);
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]));
    let mut out_u = DMatrix::zeros(m, k);
    let mut out_vt = DMatrix::zeros(k, n);
    let mut sigma = Vec::with_capacity(k);
    for (c, &i) in order.iter().take(k).enumerate() {
        let col = u.column(i);
        let pivot = col.iter().fold(0.0f64, |best, &v| if v.abs() > best.abs() { v } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        out_u.set_column(c, &(col * sign));
        out_vt.set_row(c, &(vt.row(i) * sign));
        sigma.push(sv[i]);
    }
    Ok(TruncatedSvd {
        u: out_u,
        sigma,
        vt: out_vt,
    })
}

/// Best rank-`k` approximation `U_k (Sigma_k V_k^T)`.
pub fn truncated_svd(a: &DMatrix<f64>, k: usize) -> Result<LowRankFactors> {
    Ok(svd_k(a, k)?.factors())
}

/// All singular values, descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = thin_svd(a).1.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `||A - A_k||_F^2` as the sum of the trailing squared singular values.
pub fn tail_energy(a: &DMatrix<f64>, k: usize) -> f64 {
    singular_values(a).iter().skip(k).map(|s| s * s).sum()
}

/// Minimum-norm least squares `argmin_X ||a X - b||_F`.
pub fn lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::param("lstsq: row counts differ"));
    }
    if a.ncols() == 0 || a.nrows() == 0 {
        return Ok(DMatrix::zeros(a.ncols(), b.ncols()));
    }
    let (u, sv, vt) = thin_svd(a);
    let smax = sv.max();
    let tol = (smax * 1e-12).max(f64::MIN_POSITIVE);
    let mut ub = u.transpose() * b;
    for (i, &s) in sv.iter().enumerate() {
        let inv = if s > tol { 1.0 / s } else { 0.0 };
        ub.row_mut(i).scale_mut(inv);
    }
    Ok(vt.transpose() * ub)
}

fn orthonormal_cols(q: &DMatrix<f64>, tol: f64) -> bool {
    let g = q.transpose() * q;
    (g - DMatrix::<f64>::identity(q.ncols(), q.ncols())).amax() <= tol
}

/// Thin SVD `a = U diag(s) V^T` with `min(m, n)` terms, in no particular order.
///
/// The LAPACK-style bidiagonal SVD occasionally returns an inaccurate
/// factorization on tall, highly degenerate inputs (a constant 40 x 30 matrix
/// is one), so each result is checked and the other orientation, then
/// one-sided Jacobi, is used on failure.
fn thin_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let scale = a.norm();
    let ok = |u: &DMatrix<f64>, s: &DVector<f64>, vt: &DMatrix<f64>| {
        s.iter().all(|v| v.is_finite() && *v >= 0.0)
            && orthonormal_cols(u, 1e-8)
            && orthonormal_cols(&vt.transpose(), 1e-8)
            && (u * DMatrix::from_diagonal(s) * vt - a).norm() <= 1e-9 * scale
    };
    for transpose in [m > n, m <= n] {
        let (u, s, vt) = if transpose {
            let svd = a.transpose().svd(true, true);
            let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
            (vt.transpose(), svd.singular_values, u.transpose())
        } else {
            let svd = a.clone().svd(true, true);
            (svd.u.expect("u requested"), svd.singular_values, svd.v_t.expect("v_t requested"))
        };
        if ok(&u, &s, &vt) {
            return (u, s, vt);
        }
    }
    log::debug!("falling back to Jacobi SVD on a {m}x{n} matrix");
    if m >= n {
        jacobi_svd(a)
    } else {
        let (u, s, vt) = jacobi_svd(&a.transpose());
        (vt.transpose(), s, u.transpose())
    }
}

/// One-sided Jacobi SVD of a matrix with `m >= n`.
fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let (x, y) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * x - s * y;
                        mat[(i, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = DVector::from_iterator(n, w.column_iter().map(|c| c.norm()));
    let smax = sigma.max();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        if sigma[j] > 1e-14 * smax && sigma[j] > 0.0 {
            cols.push(w.column(j) / sigma[j]);
        } else {
            cols.push(DVector::zeros(m));
        }
    }
    let mut u = DMatrix::from_columns(&cols);
    // Complete the null directions to an orthonormal set.
    let missing: Vec<usize> = (0..n).filter(|&j| cols[j].iter().all(|&x| x == 0.0)).collect();
    if !missing.is_empty() {
        let mut basis: Vec<DVector<f64>> =
            (0..n).filter(|j| !missing.contains(j)).map(|j| cols[j].clone()).collect();
        let mut e = 0;
        for &j in &missing {
            while e < m {
                let mut cand = DVector::zeros(m);
                cand[e] = 1.0;
                e += 1;
                for _ in 0..2 {
                    for b in &basis {
                        let d = b.dot(&cand);
                        cand.axpy(-d, b, 1.0);
                    }
                }
                let norm = cand.norm();
                if norm > 1e-8 {
                    let c = cand / norm;
                    u.set_column(j, &c);
                    basis.push(c);
                    break;
                }
            }
        }
    }
    (u, sigma, v.transpose())
}

/// Columns spanning `m`'s column space, by two passes of modified Gram-Schmidt.
///
/// Columns whose remainder falls below `1e-10` of the largest input column norm
/// are dropped, so `Q` may be narrower than `m`. Returns `(Q, R)` with
/// `R = Q^T m` and `m = Q R` up to the dropped directions.
pub fn orthonormalize(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let scale = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tol = 1e-10 * scale;
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for c in m.column_iter() {
        let mut v: DVector<f64> = c.into_owned();
        for _ in 0..2 {
            for q in &basis {
                let d = q.dot(&v);
                v.axpy(-d, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm > tol && norm > 0.0 {
            basis.push(v / norm);
        }
    }
    let q = if basis.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&basis)
    };
    let r = q.transpose() * m;
    (q, r)
}

/// Orthonormal basis of the row space of `m`, as rows.
pub fn orthonormalize_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    orthonormalize(&m.transpose()).0.transpose()
}

fn orthonormality_error(q: &DMatrix<f64>, side: Side) -> f64 {
    let g = match side {
        Side::Rows => q * q.transpose(),
        Side::Columns => q.transpose() * q,
    };
    let id = DMatrix::<f64>::identity(g.nrows(), g.ncols());
    (g - id).amax()
}

/// Leverage scores of an orthonormal factor.
///
/// With `orthonormal = Side::Rows`, `q` is `k x s` with orthonormal rows and the
/// score of column `j` is `||q[:, j]||^2`. With `Side::Columns` the roles swap.
/// Scores sum to the factor's rank.
pub fn leverage_scores_orthonormal(q: &DMatrix<f64>, orthonormal: Side) -> Result<Vec<f64>> {
    let err = orthonormality_error(q, orthonormal);
    if err > 1e-6 {
        return Err(Error::contract(format!(
            "factor is not orthonormal along its {orthonormal:?} (max deviation {err:e})"
        )));
    }
    Ok(match orthonormal {
        Side::Rows => q.column_iter().map(|c| c.norm_squared()).collect(),
        Side::Columns => q.row_iter().map(|r| r.norm_squared()).collect(),
    })
}

/// `ceil(40 k ln(k + 2) / eps)`.
pub fn default_regression_size(k: usize, eps: f64) -> usize {
    (40.0 * k as f64 * ((k + 2) as f64).ln() / eps).ceil() as usize
}

/// Which rows (or columns) a leverage-score sketch kept and how they were rescaled.
#[derive(Debug, Clone, PartialEq)]
pub struct LeverageSketch {
    pub side: Side,
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub s_reg: usize,
}

#[derive(Debug, Clone)]
pub struct RegressionSolution {
    pub x: DMatrix<f64>,
    /// The sketch the returned solution was computed from.
    pub sketch: LeverageSketch,
    /// Residual of the returned solution on the pooled evaluation sample.
    pub sketched_residual: f64,
    /// True when the sample covered every row with nonzero leverage and the solve was exact.
    pub exact: bool,
}

const REGRESSION_TRIES: usize = 3;

/// Rows `indices` of `a`, each scaled by the matching weight.
fn gather_rows<A: MatrixAccess + ?Sized>(
    a: &A,
    indices: &[usize],
    weights: &[f64],
) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = indices.par_iter().map(|&i| a.read_row(i)).collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(indices.len(), a.cols(), |r, j| rows[r][j] * weights[r]))
}

fn scaled_rows(b: &DMatrix<f64>, indices: &[usize], weights: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(indices.len(), b.ncols(), |r, c| b[(indices[r], c)] * weights[r])
}

/// `argmin_X ||E'A - E'B X||` for `b` with orthonormal columns, sampling rows of `a`.
fn regression_rows<A: MatrixAccess + ?Sized>(
    a: &A,
    b: &DMatrix<f64>,
    eps: f64,
    s_reg: Option<usize>,
    seed: u64,
    side: Side,
) -> Result<RegressionSolution> {
    if a.rows() != b.nrows() {
        return Err(Error::param(format!(
            "factor has {} rows but the matrix has {}",
            b.nrows(),
            a.rows()
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1), got {eps}")));
    }
    let k = b.ncols();
    let lev = leverage_scores_orthonormal(b, Side::Columns)?;
    let s = match s_reg {
        Some(s) if s < k => {
            return Err(Error::param(format!("s_reg = {s} is below the rank {k}")));
        }
        Some(s) => s,
        None => default_regression_size(k, eps),
    };
    let support: Vec<usize> = (0..lev.len()).filter(|&i| lev[i] > 1e-14).collect();

    if support.len() <= s {
        let w = vec![1.0; support.len()];
        let ea = gather_rows(a, &support, &w)?;
        let eb = scaled_rows(b, &support, &w);
        let x = lstsq(&eb, &ea)?;
        let resid = (&ea - &eb * &x).norm_squared();
        return Ok(RegressionSolution {
            x,
            sketch: LeverageSketch {
                side,
                indices: support,
                weights: w,
                s_reg: s,
            },
            sketched_residual: resid,
            exact: true,
        });
    }

    let total: f64 = lev.iter().sum();
    let probs: Vec<f64> = lev.iter().map(|l| l / total).collect();
    let table = WeightedIndex::new(&probs).map_err(|_| Error::DegenerateDistribution)?;
    let sketches: Vec<(Vec<usize>, Vec<f64>)> = (0..REGRESSION_TRIES)
        .map(|t| {
            let mut rng = stream(seed, &[0x1e7, side.tag(), t as u64]);
            let idx: Vec<usize> = (0..s).map(|_| table.sample(&mut rng)).collect();
            let w = idx.iter().map(|&i| 1.0 / (s as f64 * probs[i]).sqrt()).collect();
            (idx, w)
        })
        .collect();

    // Every candidate is scored on the pooled sample of all tries.
    let pool_idx: Vec<usize> = sketches.iter().flat_map(|(i, _)| i.iter().copied()).collect();
    let pooled = pool_idx.len() as f64;
    let pool_w: Vec<f64> = pool_idx.iter().map(|&i| 1.0 / (pooled * probs[i]).sqrt()).collect();
    let mut distinct = pool_idx.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let ones = vec![1.0; distinct.len()];
    let rows = gather_rows(a, &distinct, &ones)?;
    let pos = |i: usize| distinct.binary_search(&i).expect("pooled index");
    let pool_a = DMatrix::from_fn(pool_idx.len(), a.cols(), |r, j| rows[(pos(pool_idx[r]), j)] * pool_w[r]);
    let pool_b = scaled_rows(b, &pool_idx, &pool_w);

    let mut best: Option<RegressionSolution> = None;
    for (idx, w) in sketches {
        let ea = DMatrix::from_fn(idx.len(), a.cols(), |r, j| rows[(pos(idx[r]), j)] * w[r]);
        let eb = scaled_rows(b, &idx, &w);
        let x = lstsq(&eb, &ea)?;
        let resid = (&pool_a - &pool_b * &x).norm_squared();
        if best.as_ref().is_none_or(|b| resid < b.sketched_residual) {
            best = Some(RegressionSolution {
                x,
                sketch: LeverageSketch {
                    side,
                    indices: idx,
                    weights: w,
                    s_reg: s,
                },
                sketched_residual: resid,
                exact: false,
            });
        }
    }
    Ok(best.expect("at least one try"))
}

/// `argmin_X ||A - X W^T||` for `wt` (`k x n`) with orthonormal rows, solved on a
/// leverage-score sample of the columns of `a` (best of three sketches).
/// Only the sampled columns of `a` are read. Returns `X` as `m x k`.
pub fn sketched_regression_right<A: MatrixAccess + ?Sized>(
    a: &A,
    wt: &DMatrix<f64>,
    eps: f64,
    s_reg: Option<usize>,
    seed: u64,
) -> Result<RegressionSolution> {
    let mut sol = regression_rows(&Transposed(a), &wt.transpose(), eps, s_reg, seed, Side::Columns)?;
    sol.x = sol.x.transpose();
    Ok(sol)
}

/// `argmin_X ||A - B X||` for `b` (`m x k`) with orthonormal columns, solved on a
/// leverage-score sample of the rows of `a`. Returns `X` as `k x n`.
pub fn sketched_regression_left<A: MatrixAccess + ?Sized>(
    a: &A,
    b: &DMatrix<f64>,
    eps: f64,
    s_reg: Option<usize>,
    seed: u64,
) -> Result<RegressionSolution> {
    regression_rows(a, b, eps, s_reg, seed, Side::Rows)
}

/// `ceil(c_cw k^2 / eps^2)`.
pub fn countsketch_size(k: usize, eps: f64, c_cw: f64) -> usize {
    (c_cw * (k * k) as f64 / (eps * eps)).ceil() as usize
}

/// `S A` for an `s x m` CountSketch `S`.
fn countsketch_rows(a: &DMatrix<f64>, s: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(s, a.ncols());
    for i in 0..a.nrows() {
        let h = rng.random_range(0..s);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let row = a.row(i) * sign;
        let mut target = out.row_mut(h);
        target += row;
    }
    out
}

fn isl_once(a: &DMatrix<f64>, k: usize, s: usize, seed: u64, attempt: u64) -> Result<LowRankFactors> {
    let (m, n) = a.shape();
    let mut rng = stream(seed, &[0xc5, attempt]);
    // Range sketch Y = A R.
    let y = if s >= n {
        a.clone()
    } else {
        countsketch_rows(&a.transpose(), s, &mut rng).transpose()
    };
    let (u, _) = orthonormalize(&y);
    if u.ncols() == 0 {
        return Ok(LowRankFactors {
            singular_values: Some(Vec::new()),
            ..LowRankFactors::zeros(m, n, 0)
        });
    }
    // Rank-constrained solve on a left sketch: X = (SU)^+ [P_{SU} S A]_k.
    let (su, sa) = if s >= m {
        (u.clone(), a.clone())
    } else {
        let mut r2 = rng.clone();
        let su = countsketch_rows(&u, s, &mut rng);
        let sa = countsketch_rows(a, s, &mut r2);
        (su, sa)
    };
    let (qs, _) = orthonormalize(&su);
    let proj = qs.transpose() * &sa;
    let kk = k.min(proj.nrows()).min(proj.ncols());
    let top = svd_k(&proj, kk)?;
    let core = qs * &top.u * DMatrix::from_diagonal(&DVector::from_vec(top.sigma.clone()));
    let coef = lstsq(&su, &core)?;
    let g = &u * coef;
    // Rebalance into L D W^T with orthonormal L and W^T.
    let (qg, rg) = orthonormalize(&g);
    if qg.ncols() == 0 {
        return Ok(LowRankFactors {
            singular_values: Some(Vec::new()),
            ..LowRankFactors::zeros(m, n, 0)
        });
    }
    let inner = svd_k(&rg, rg.nrows().min(rg.ncols()))?;
    let l = qg * &inner.u;
    let wt = &inner.vt * &top.vt;
    let d = inner.sigma;
    let mut left = l;
    for (c, s) in d.iter().enumerate() {
        left.column_mut(c).scale_mut(*s);
    }
    Ok(LowRankFactors {
        left,
        right: wt,
        singular_values: Some(d),
    })
}

/// Sketch-and-solve rank-`k` approximation with CountSketch embeddings of size
/// `ceil(8 k^2 / eps^2)` on both sides (capped at the dimensions).
///
/// The returned factors are `L D` on the left and `W^T` with orthonormal rows on
/// the right; `singular_values` holds `D`. The width is `min(k, rank)`. Three
/// independent attempts are made and the one with the smallest exact residual kept.
pub fn input_sparsity_lra(a: &DMatrix<f64>, k: usize, eps: f64, seed: u64) -> Result<LowRankFactors> {
    input_sparsity_lra_with(a, k, eps, 8.0, seed)
}

pub fn input_sparsity_lra_with(
    a: &DMatrix<f64>,
    k: usize,
    eps: f64,
    c_cw: f64,
    seed: u64,
) -> Result<LowRankFactors> {
    let (m, n) = a.shape();
    if k == 0 || k > m.min(n) {
        return Err(Error::param(format!("rank {k} must lie in 1..={}", m.min(n))));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1), got {eps}")));
    }
    let s = countsketch_size(k, eps, c_cw).max(k);
    let tries = if s >= m.max(n) { 1 } else { 3 };
    let mut best: Option<(f64, LowRankFactors)> = None;
    for t in 0..tries {
        let f = isl_once(a, k, s, seed, t)?;
        let resid = (a - &f.left * &f.right).norm_squared();
        if best.as_ref().is_none_or(|(r, _)| resid < *r) {
            best = Some((resid, f));
        }
    }
    Ok(best.expect("at least one attempt").1)
}

#[cfg(test)]
mod tests;
