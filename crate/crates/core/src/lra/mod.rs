//! The top-level approximation drivers and residual evaluation.
//!
//! - [`additive_lra_two_level`]: column sketch, row sketch, input-sparsity LRA
//!   on the small core, then two sketched regressions back to full size.
//! - [`additive_lra_recursive`]: alternating column/row sketches for `depth_2r`
//!   levels, an exact SVD at the bottom, and one sketched regression per level
//!   on the way up.
//! - [`euclidean_bicriteria`]: rank `k + 4` relative-error approximation of a
//!   squared Euclidean distance matrix via its PSD Gram part.
//!
//! All of them read `A` only through [`MatrixAccess`]; the report's
//! `entries_read` is the counter delta of the root oracle.

mod config;
mod euclidean;
mod pipeline;
mod residual;

pub use config::{Algorithm, BudgetRule, LraConfig};
pub use euclidean::{
    decompose_sq_euclidean, euclidean_bicriteria, euclidean_bicriteria_with, psd_sublinear_lra, BicriteriaOutput,
    DiagonalNystrom, PsdLowRank, PsdView, SqEuclideanParts,
};
pub use pipeline::{
    additive_lra_recursive, additive_lra_two_level, run_algorithm, run_repeated, svd_oracle,
    LraReport, StageInfo,
};
pub use residual::{
    evaluate_residual, load_factors, read_factors, save_factors, write_factors, Reference,
    Residual,
};

#[cfg(test)]
mod tests;
