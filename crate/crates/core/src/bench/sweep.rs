use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::InstanceSpec;
use crate::lra::{run_algorithm, Algorithm, LraConfig};
use crate::rng::derive_seed;
use crate::{Error, Metric, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub algorithm: Algorithm,
    pub lra: LraConfig,
    pub clusters: usize,
    pub dim: usize,
    pub spread: f64,
    pub metric: Metric,
}

impl SweepConfig {
    /// Square clustered Euclidean instances with the desk profile.
    pub fn clustered(algorithm: Algorithm, k: usize, eps: f64, seed: u64) -> Self {
        Self {
            algorithm,
            lra: LraConfig::desk(k, eps).with_seed(seed),
            clusters: 10,
            dim: 3,
            spread: 0.05,
            metric: Metric::Euclidean,
        }
    }

    pub fn instance(&self, n: usize) -> InstanceSpec {
        InstanceSpec::Clustered {
            m: n,
            n,
            clusters: self.clusters.min(n),
            dim: self.dim,
            spread: self.spread,
            metric: self.metric,
            seed: derive_seed(self.lra.seed, &[n as u64]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub entries_read: u64,
    pub mn: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub algorithm: Algorithm,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `ln(entries_read)` against `ln(n)`.
    pub slope: f64,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "algorithm,n,entries_read,mn,fraction,wall_ms")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{:.3}",
                self.algorithm,
                r.n,
                r.entries_read,
                r.mn,
                super::format_float(r.entries_read as f64 / r.mn as f64),
                r.wall_ms
            )?;
        }
        writeln!(w, "# slope={}", super::format_float(self.slope))?;
        Ok(())
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let len = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / len, ys.iter().sum::<f64>() / len);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs the configured algorithm once per size on a fresh oracle and fits the
/// access-count exponent.
pub fn run_scaling_sweep(sizes: &[usize], cfg: &SweepConfig) -> Result<SweepTable> {
    if sizes.len() < 3 {
        return Err(Error::param(format!("a scaling sweep needs at least 3 sizes, got {}", sizes.len())));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("sizes must be strictly ascending"));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let oracle = Arc::new(cfg.instance(n).build()?);
        let lra = LraConfig {
            seed: derive_seed(cfg.lra.seed, &[0x5eed, n as u64]),
            ..cfg.lra.clone()
        };
        let rep = run_algorithm(cfg.algorithm, &oracle, &lra)?;
        log::info!("{} n={n}: {} entries read", cfg.algorithm, rep.entries_read);
        rows.push(SweepRow {
            n,
            entries_read: rep.entries_read,
            mn: (n * n) as u64,
            wall_ms: rep.wall_ms,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.entries_read.max(1) as f64)).collect();
    Ok(SweepTable {
        algorithm: cfg.algorithm,
        slope: log_log_slope(&pts),
        rows,
    })
}
