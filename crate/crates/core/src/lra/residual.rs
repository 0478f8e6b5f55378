use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::metricspace::io::{read_named_blocks, write_matrix_block};
use crate::sketchlin::{check_cap, singular_values, LowRankFactors};
use crate::{DistanceOracle, Error, Result};

/// Tail energies below this fraction of `||A||_F^2` are treated as exactly zero.
const ZERO_TAIL: f64 = 1e-24;

/// Quantities of `A` the residual is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub k: usize,
    pub frob_sq: f64,
    /// `||A - A_k||_F^2`.
    pub tail_sq: f64,
}

impl Reference {
    pub fn compute(a: &DMatrix<f64>, k: usize) -> Self {
        let s = singular_values(a);
        let frob_sq = a.norm_squared();
        let mut tail_sq: f64 = s.iter().skip(k).map(|v| v * v).sum();
        if tail_sq <= ZERO_TAIL * frob_sq {
            tail_sq = 0.0;
        }
        Self { k, frob_sq, tail_sq }
    }

    pub fn residual(&self, a: &DMatrix<f64>, f: &LowRankFactors) -> Result<Residual> {
        if (f.rows(), f.cols()) != a.shape() {
            return Err(Error::param(format!(
                "factors are {}x{} but the matrix is {}x{}",
                f.rows(),
                f.cols(),
                a.nrows(),
                a.ncols()
            )));
        }
        let approx_sq = (a - &f.left * &f.right).norm_squared();
        Ok(Residual::new(approx_sq, *self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    /// `||A - M N^T||_F^2`.
    pub approx_sq: f64,
    /// `approx_sq - ||A - A_k||_F^2`.
    pub additive: f64,
    /// `approx_sq / ||A - A_k||_F^2`; infinite when the denominator is zero.
    pub relative: f64,
    /// `additive / ||A||_F^2` (0 for the zero matrix).
    pub relative_to_frob: f64,
    pub reference: Reference,
}

impl Residual {
    pub fn new(approx_sq: f64, reference: Reference) -> Self {
        let additive = approx_sq - reference.tail_sq;
        let relative = if reference.tail_sq > 0.0 {
            approx_sq / reference.tail_sq
        } else {
            f64::INFINITY
        };
        let relative_to_frob = if reference.frob_sq > 0.0 {
            additive / reference.frob_sq
        } else {
            0.0
        };
        Self {
            approx_sq,
            additive,
            relative,
            relative_to_frob,
            reference,
        }
    }

    /// `additive <= eps ||A||_F^2`, with `1e-9` relative slack.
    pub fn passes(&self, eps: f64) -> bool {
        self.additive <= (eps + 1e-9) * self.reference.frob_sq
    }
}

/// Dense verification of `factors` against the oracle's matrix.
///
/// Entries are computed from the oracle's source directly, so the access
/// counter is untouched.
pub fn evaluate_residual(
    oracle: &DistanceOracle,
    factors: &LowRankFactors,
    k: usize,
    cap: usize,
) -> Result<Residual> {
    use crate::MatrixAccess;
    check_cap(oracle.rows(), oracle.cols(), cap)?;
    let a = oracle.dense_uncounted();
    Reference::compute(&a, k).residual(&a, factors)
}

/// `left rows=<m> cols=<k>` block followed by `right rows=<k> cols=<n>`.
pub fn write_factors<W: Write>(mut w: W, f: &LowRankFactors) -> Result<()> {
    write_matrix_block(&mut w, Some("left"), &f.left)?;
    write_matrix_block(&mut w, Some("right"), &f.right)
}

pub fn read_factors<R: BufRead>(r: R) -> Result<LowRankFactors> {
    let mut blocks = read_named_blocks(r, &["left", "right"])?;
    let right = blocks.pop().expect("two blocks");
    let left = blocks.pop().expect("two blocks");
    LowRankFactors::new(left, right)
}

pub fn save_factors(path: impl AsRef<Path>, f: &LowRankFactors) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_factors(file, f)
}

pub fn load_factors(path: impl AsRef<Path>) -> Result<LowRankFactors> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    read_factors(file)
}
