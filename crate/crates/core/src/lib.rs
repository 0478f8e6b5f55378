//! Sublinear-time low-rank approximation of distance matrices.
//!
//! The crate is organised bottom-up:
//!
//! - [`metricspace`]: point sets, metrics and the access-counted [`DistanceOracle`].
//! - [`normest`]: coarse row/column squared-norm estimation by biased uniform sampling.
//! - [`pcp`]: sampling distributions and additive projection-cost preserving sketches.
//! - [`sketchlin`]: dense kernels, input-sparsity low-rank approximation and
//!   leverage-score sketched regression.
//! - [`lra`]: the two-level, recursive and Euclidean bicriteria drivers plus residual evaluation.
//! - [`bench`]: experiment configuration, reports, scaling sweeps and the CLI.
//!
//! The resource every algorithm is measured by is the number of distinct matrix
//! entries it reads; every matrix the algorithms touch implements [`MatrixAccess`],
//! which reports the read count of the root oracle.

pub mod bench;
mod error;
pub mod lra;
pub mod metricspace;
pub mod normest;
pub mod pcp;
pub mod rng;
pub mod sketchlin;

pub use error::{Error, Result};
pub use metricspace::{DistanceOracle, MatrixAccess, Metric, PointSet};
pub use sketchlin::{DenseMatrix, LowRankFactors};

/// Default cap on the number of entries any dense kernel will accept.
pub const DEFAULT_DENSE_CAP: usize = 10_000_000;

/// Environment variable that overrides [`DEFAULT_DENSE_CAP`].
pub const DENSE_CAP_ENV: &str = "SUBDIST_DENSE_CAP";

/// Dense cap honouring the `SUBDIST_DENSE_CAP` override.
pub fn dense_cap_from_env() -> usize {
    std::env::var(DENSE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(DEFAULT_DENSE_CAP)
}
