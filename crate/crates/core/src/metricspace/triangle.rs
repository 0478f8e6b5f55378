//! Empirical check of the approximate triangle inequality.
//!
//! For a row `p` and columns `q, r`, with `D = max_i |A[i][q] - A[i][r]|`:
//!
//! ```text
//! |A[p][r] - D| / (1+eps) <= A[p][q] <= (1+eps) (A[p][r] + D)
//! |A[p][q] - A[p][r]| / (1+eps) <= D <= (1+eps) (A[p][q] + A[p][r])
//! ```
//!
//! and the same for the transpose. Sampled mode evaluates the inner max over a
//! fixed uniform subsample of rows (plus `p` itself); exhaustive mode checks
//! every triple with the exact max.

use rand::seq::index::sample;
use rand::Rng;

use super::{MatrixAccess, Transposed};
use crate::rng::stream;
use crate::{Error, Result};

/// Rounding slack on the worst ratio.
const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct TriangleCheck {
    pub eps: f64,
    pub n_triples: usize,
    pub seed: u64,
    pub exhaustive: bool,
    /// Size of the row subsample used for the inner max in sampled mode.
    pub inner_rows: usize,
}

impl TriangleCheck {
    pub fn sampled(eps: f64, n_triples: usize, seed: u64) -> Self {
        Self {
            eps,
            n_triples,
            seed,
            exhaustive: false,
            inner_rows: 64,
        }
    }

    pub fn exhaustive(eps: f64) -> Self {
        Self {
            eps,
            n_triples: 0,
            seed: 0,
            exhaustive: true,
            inner_rows: usize::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleReport {
    pub pass: bool,
    /// Largest `lhs / rhs` over all tested inequalities; `<= 1` means satisfied.
    pub worst_ratio: f64,
    pub triples_checked: usize,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs <= rhs {
        if rhs > 0.0 {
            lhs / rhs
        } else {
            0.0
        }
    } else if rhs > 0.0 {
        lhs / rhs
    } else {
        f64::INFINITY
    }
}

fn triple_ratio(apq: f64, apr: f64, d: f64, eps: f64) -> f64 {
    let s = 1.0 + eps;
    ratio((apr - d).abs(), s * apq)
        .max(ratio(apq, s * (apr + d)))
        .max(ratio((apq - apr).abs(), s * d))
        .max(ratio(d, s * (apq + apr)))
}

fn check_one<A: MatrixAccess + ?Sized>(a: &A, cfg: &TriangleCheck, tag: u64) -> Result<(f64, usize)> {
    let (m, n) = (a.rows(), a.cols());
    if cfg.exhaustive {
        let cols: Vec<Vec<f64>> = (0..n).map(|j| a.read_column(j)).collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        let mut count = 0;
        for q in 0..n {
            for r in 0..n {
                let d = (0..m)
                    .map(|i| (cols[q][i] - cols[r][i]).abs())
                    .fold(0.0, f64::max);
                for p in 0..m {
                    worst = worst.max(triple_ratio(cols[q][p], cols[r][p], d, cfg.eps));
                    count += 1;
                }
            }
        }
        return Ok((worst, count));
    }

    let mut rng = stream(cfg.seed, &[0x7a1u64, tag]);
    let inner: Vec<usize> = sample(&mut rng, m, cfg.inner_rows.min(m)).into_vec();
    let mut worst = 0.0f64;
    for _ in 0..cfg.n_triples {
        let p = rng.random_range(0..m);
        let q = rng.random_range(0..n);
        let r = rng.random_range(0..n);
        let mut d = 0.0f64;
        for &i in inner.iter().chain(std::iter::once(&p)) {
            d = d.max((a.entry(i, q)? - a.entry(i, r)?).abs());
        }
        worst = worst.max(triple_ratio(a.entry(p, q)?, a.entry(p, r)?, d, cfg.eps));
    }
    Ok((worst, cfg.n_triples))
}

/// Tests the approximate triangle inequality on `a` and its transpose.
///
/// Reads go through `a`, so they are charged to its counter.
pub fn check_approx_triangle<A: MatrixAccess + ?Sized>(
    a: &A,
    cfg: &TriangleCheck,
) -> Result<TriangleReport> {
    if !(0.0..=1.0).contains(&cfg.eps) {
        return Err(Error::param(format!("eps must lie in [0, 1], got {}", cfg.eps)));
    }
    if !cfg.exhaustive && cfg.n_triples == 0 {
        return Err(Error::param("n_triples must be at least 1"));
    }
    let (w1, c1) = check_one(a, cfg, 0)?;
    let (w2, c2) = check_one(&Transposed(a), cfg, 1)?;
    let worst = w1.max(w2);
    Ok(TriangleReport {
        pass: worst <= 1.0 + SLACK,
        worst_ratio: worst,
        triples_checked: c1 + c2,
    })
}
