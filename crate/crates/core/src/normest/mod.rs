//! Coarse squared-norm estimation for the rows or columns of a distance matrix.
//!
//! The estimator reads one column and one row to find an anchor distance `d`
//! (the largest entry in the row whose first entry is smallest), then for each
//! row samples `b` entries uniformly with replacement and reports
//! `d^2 + (n / b) * sum(A[i][j]^2)`. Under the approximate triangle inequality
//! this is an `O(n / b)` approximation of `||A[i,*]||^2`; the median of several
//! independent repetitions makes it hold for all rows at once.
//!
//! Rescaled submatrices are handled by splitting rows and columns into blocks
//! whose rescaling factors agree up to `(1 + eps)`, estimating every block on
//! its own, and summing (each block contributes its own `d^2`).

use rand::Rng;
use rayon::prelude::*;

use crate::metricspace::{MatrixAccess, Restricted, Transposed};
use crate::pcp::SketchView;
use crate::rng::stream;
use crate::{Error, Result};

/// Which axis of a matrix an object refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Rows,
    Columns,
}

impl Side {
    pub fn tag(self) -> u64 {
        match self {
            Side::Rows => 0x5257,
            Side::Columns => 0x434f,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimates {
    pub side: Side,
    pub values: Vec<f64>,
    /// The `n / b` (or `m / b`) factor the estimates are accurate to, up to a constant.
    pub approx_factor: f64,
    pub sample_budget: usize,
    pub repetitions: usize,
    /// Sum over blocks of the squared anchor distances; every value is at least this.
    pub anchor_bias: f64,
    pub blocks: usize,
    pub entries_read: u64,
}

/// `ceil(8 ln(max(m, 2)))`.
pub fn default_repetitions(m: usize) -> usize {
    (8.0 * (m.max(2) as f64).ln()).ceil() as usize
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// One run of the row estimator on `a` with `reps` independent estimates per row.
///
/// Returns the per-row medians and the anchor distance `d`.
fn row_pass<A: MatrixAccess + ?Sized>(
    a: &A,
    b: usize,
    reps: usize,
    seed: u64,
    tags: &[u64],
) -> Result<(Vec<f64>, f64)> {
    let (m, n) = (a.rows(), a.cols());
    let first_col = a.read_column(0)?;
    let anchor_row = first_col
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &v)| if v < best.1 { (i, v) } else { best })
        .0;
    let d = a.read_row(anchor_row)?.into_iter().fold(0.0, f64::max);
    let d2 = d * d;
    let scale = n as f64 / b as f64;

    let values = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut ests = Vec::with_capacity(reps);
            for r in 0..reps {
                let mut tag = tags.to_vec();
                tag.extend([i as u64, r as u64]);
                let mut rng = stream(seed, &tag);
                let mut sum = 0.0;
                for _ in 0..b {
                    let v = a.entry(i, rng.random_range(0..n))?;
                    sum += v * v;
                }
                ests.push(d2 + scale * sum);
            }
            Ok(median(&mut ests))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((values, d))
}

fn validate(b: usize, len: usize, reps: usize) -> Result<()> {
    if b == 0 || b > len {
        return Err(Error::param(format!(
            "sample budget b must lie in 1..={len}, got {b}"
        )));
    }
    if reps == 0 {
        return Err(Error::param("repetitions must be at least 1"));
    }
    Ok(())
}

/// Squared row norms estimated with `b` samples per row, median of `repetitions`.
pub fn estimate_row_norms<A: MatrixAccess + ?Sized>(
    a: &A,
    b: usize,
    repetitions: usize,
    seed: u64,
) -> Result<NormEstimates> {
    validate(b, a.cols(), repetitions)?;
    let before = a.entries_read();
    let (values, d) = row_pass(a, b, repetitions, seed, &[Side::Rows.tag()])?;
    Ok(NormEstimates {
        side: Side::Rows,
        values,
        approx_factor: a.cols() as f64 / b as f64,
        sample_budget: b,
        repetitions,
        anchor_bias: d * d,
        blocks: 1,
        entries_read: a.entries_read() - before,
    })
}

/// Squared column norms; the transpose of [`estimate_row_norms`].
pub fn estimate_col_norms<A: MatrixAccess + ?Sized>(
    a: &A,
    b: usize,
    repetitions: usize,
    seed: u64,
) -> Result<NormEstimates> {
    validate(b, a.rows(), repetitions)?;
    let before = a.entries_read();
    let t = Transposed(a);
    let (values, d) = row_pass(&t, b, repetitions, seed, &[Side::Columns.tag()])?;
    Ok(NormEstimates {
        side: Side::Columns,
        values,
        approx_factor: a.rows() as f64 / b as f64,
        sample_budget: b,
        repetitions,
        anchor_bias: d * d,
        blocks: 1,
        entries_read: a.entries_read() - before,
    })
}

/// Block-wise estimation: every `(row block, column block)` submatrix is
/// estimated independently with `min(b, block width)` samples and the results
/// are summed per row (or per column). Empty blocks are skipped.
pub fn estimate_norms_blocked<A: MatrixAccess + ?Sized>(
    a: &A,
    side: Side,
    row_blocks: &[Vec<usize>],
    col_blocks: &[Vec<usize>],
    b: usize,
    repetitions: usize,
    seed: u64,
) -> Result<NormEstimates> {
    if b == 0 {
        return Err(Error::param("sample budget b must be at least 1"));
    }
    if repetitions == 0 {
        return Err(Error::param("repetitions must be at least 1"));
    }
    let before = a.entries_read();
    let len = match side {
        Side::Rows => a.rows(),
        Side::Columns => a.cols(),
    };
    let mut values = vec![0.0; len];
    let mut bias = 0.0;
    let mut blocks = 0;
    for (rbi, rb) in row_blocks.iter().enumerate() {
        for (cbi, cb) in col_blocks.iter().enumerate() {
            if rb.is_empty() || cb.is_empty() {
                continue;
            }
            blocks += 1;
            let sub = Restricted { parent: a, rows: rb, cols: cb };
            let tags = [side.tag(), rbi as u64, cbi as u64];
            let (est, d) = match side {
                Side::Rows => row_pass(&sub, b.min(cb.len()), repetitions, seed, &tags)?,
                Side::Columns => {
                    row_pass(&Transposed(&sub), b.min(rb.len()), repetitions, seed, &tags)?
                }
            };
            let targets = match side {
                Side::Rows => rb,
                Side::Columns => cb,
            };
            for (&t, v) in targets.iter().zip(est) {
                values[t] += v;
            }
            bias += d * d;
        }
    }
    let other = match side {
        Side::Rows => a.cols(),
        Side::Columns => a.rows(),
    };
    Ok(NormEstimates {
        side,
        values,
        approx_factor: other as f64 / b.min(other).max(1) as f64,
        sample_budget: b,
        repetitions,
        anchor_bias: bias,
        blocks,
        entries_read: a.entries_read() - before,
    })
}

/// Norm estimation on a rescaled sketch, blocking by the sketch's weight classes.
pub fn estimate_norms_weighted(
    view: &SketchView,
    side: Side,
    b: usize,
    repetitions: usize,
    seed: u64,
) -> Result<NormEstimates> {
    estimate_norms_blocked(
        view,
        side,
        &view.row_blocks(),
        &view.col_blocks(),
        b,
        repetitions,
        seed,
    )
}

#[cfg(test)]
mod tests;
