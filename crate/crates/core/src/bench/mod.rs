//! Experiment plumbing: instance specs, report rows, scaling sweeps and the CLI.

mod cli;
mod report;
mod sweep;
mod verify;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use cli::cli_main;
pub use report::{format_float, ReportRow, CSV_HEADER};
pub use sweep::{log_log_slope, run_scaling_sweep, SweepConfig, SweepRow, SweepTable};
pub use verify::{run_verify_suite, CheckOutcome};

use crate::lra::{Algorithm, LraConfig};
use crate::metricspace::{gen_clustered, gen_uniform, gen_zero, HardInstanceSpec};
use crate::metricspace::io::{load_matrix, load_points};
use crate::{DistanceOracle, Error, Metric, PointSet, Result};

/// Where an experiment's distance matrix comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "generator")]
pub enum InstanceSpec {
    Clustered {
        m: usize,
        n: usize,
        clusters: usize,
        dim: usize,
        spread: f64,
        metric: Metric,
        seed: u64,
    },
    Uniform {
        m: usize,
        n: usize,
        dim: usize,
        metric: Metric,
        seed: u64,
    },
    Zero {
        m: usize,
        n: usize,
    },
    Hard(HardInstanceSpec),
    /// A point file (distances of the set against itself) or a matrix file.
    Points {
        path: PathBuf,
        metric: Metric,
    },
    Matrix {
        path: PathBuf,
    },
}

impl InstanceSpec {
    /// Oracle with a zero counter. `SqEuclidean` generators use `P` on both sides.
    pub fn build(&self) -> Result<DistanceOracle> {
        let pair = |p: PointSet, q: PointSet, metric: Metric| {
            if metric == Metric::SqEuclidean {
                if p.len() != q.len() {
                    return Err(Error::param("squared Euclidean instances must be square (m = n)"));
                }
                DistanceOracle::symmetric(Arc::new(p), metric)
            } else {
                DistanceOracle::from_points(Arc::new(p), Arc::new(q), metric)
            }
        };
        match self {
            InstanceSpec::Clustered { m, n, clusters, dim, spread, metric, seed } => {
                let (p, q) = gen_clustered(*m, *n, *clusters, *dim, *spread, *seed)?;
                pair(p, q, *metric)
            }
            InstanceSpec::Uniform { m, n, dim, metric, seed } => {
                let (p, q) = gen_uniform(*m, *n, *dim, *seed)?;
                pair(p, q, *metric)
            }
            InstanceSpec::Zero { m, n } => {
                let (p, q) = gen_zero(*m, *n, 1)?;
                pair(p, q, Metric::Euclidean)
            }
            InstanceSpec::Hard(spec) => crate::metricspace::gen_linf_hard(*spec),
            InstanceSpec::Points { path, metric } => {
                DistanceOracle::symmetric(Arc::new(load_points(path)?), *metric)
            }
            InstanceSpec::Matrix { path } => DistanceOracle::from_matrix(load_matrix(path)?),
        }
    }

    pub fn id(&self) -> String {
        match self {
            InstanceSpec::Clustered { m, n, clusters, dim, spread, metric, seed } => {
                format!("clustered-{}-{m}x{n}-c{clusters}-d{dim}-s{spread}-seed{seed}", metric.name())
            }
            InstanceSpec::Uniform { m, n, dim, metric, seed } => {
                format!("uniform-{}-{m}x{n}-d{dim}-seed{seed}", metric.name())
            }
            InstanceSpec::Zero { m, n } => format!("zero-{m}x{n}"),
            InstanceSpec::Hard(s) => format!(
                "hard-linf-n{}-row{}-{}-seed{}",
                s.n,
                s.special_row,
                if s.sign > 0 { "plus" } else { "minus" },
                s.seed
            ),
            InstanceSpec::Points { path, metric } => format!("points-{}-{}", metric.name(), path.display()),
            InstanceSpec::Matrix { path } => format!("matrix-{}", path.display()),
        }
    }
}

/// One `approx` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub algorithm: Algorithm,
    pub lra: LraConfig,
    pub trials: usize,
    pub repeat: usize,
    pub output: Option<PathBuf>,
    pub verify: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.repeat == 0 {
            return Err(Error::param("repeat must be at least 1"));
        }
        Ok(())
    }
}

/// Runs every trial (concurrently, seeds `seed + i`) and returns rows in trial order.
pub fn run_experiment(exp: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    use rayon::prelude::*;

    exp.validate()?;
    let base = exp.instance.build()?;
    let reference = if exp.verify {
        use crate::MatrixAccess;
        crate::sketchlin::check_cap(base.rows(), base.cols(), exp.lra.dense_cap)?;
        let dense = base.dense_uncounted();
        let r = crate::lra::Reference::compute(&dense, exp.lra.k);
        Some((dense, r))
    } else {
        None
    };
    let id = exp.instance.id();
    (0..exp.trials)
        .into_par_iter()
        .map(|t| {
            let cfg = LraConfig {
                seed: exp.lra.seed.wrapping_add(t as u64),
                ..exp.lra.clone()
            };
            let oracle = Arc::new(base.fresh());
            let report = crate::lra::run_repeated(exp.algorithm, &oracle, &cfg, exp.repeat)?;
            let residual = match &reference {
                Some((dense, r)) => Some(r.residual(dense, &report.factors)?),
                None => None,
            };
            Ok(ReportRow::from_report(&id, &oracle, &report, residual.as_ref()))
        })
        .collect()
}
