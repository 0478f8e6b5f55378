use std::io::Write;

use serde::{Serialize, Serializer};

use crate::lra::{LraReport, Residual};
use crate::{DistanceOracle, MatrixAccess, Result};

pub const CSV_HEADER: &str = "instance_id,m,n,k,eps,algorithm,seed,entries_read,additive_residual,relative_residual,frob_norm_sq,wall_ms,pass";

/// Shortest round-trip decimal; infinities print as `inf` / `-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

fn ser_float<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) if v.is_finite() => s.serialize_f64(*v),
        Some(v) => s.serialize_str(&format_float(*v)),
        None => s.serialize_none(),
    }
}

/// One line of the report table. Residual fields are empty unless the run was verified.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub instance_id: String,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub algorithm: String,
    pub seed: u64,
    pub entries_read: u64,
    #[serde(serialize_with = "ser_float")]
    pub additive_residual: Option<f64>,
    #[serde(serialize_with = "ser_float")]
    pub relative_residual: Option<f64>,
    #[serde(serialize_with = "ser_float")]
    pub frob_norm_sq: Option<f64>,
    pub wall_ms: f64,
    pub pass: Option<bool>,
}

impl ReportRow {
    pub fn from_report(
        instance_id: &str,
        oracle: &DistanceOracle,
        report: &LraReport,
        residual: Option<&Residual>,
    ) -> Self {
        let eps = report.config.eps;
        Self {
            instance_id: instance_id.to_string(),
            m: oracle.rows(),
            n: oracle.cols(),
            k: report.config.k,
            eps,
            algorithm: report.algorithm.name().to_string(),
            seed: report.config.seed,
            entries_read: report.entries_read,
            additive_residual: residual.map(|r| r.additive),
            relative_residual: residual.map(|r| r.relative),
            frob_norm_sq: residual.map(|r| r.reference.frob_sq),
            wall_ms: report.wall_ms,
            pass: residual.map(|r| r.passes(eps)),
        }
    }

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
        [
            self.instance_id.clone(),
            self.m.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            format_float(self.eps),
            self.algorithm.clone(),
            self.seed.to_string(),
            self.entries_read.to_string(),
            opt(self.additive_residual),
            opt(self.relative_residual),
            opt(self.frob_norm_sq),
            format!("{:.3}", self.wall_ms),
            self.pass.map(|p| p.to_string()).unwrap_or_default(),
        ]
        .join(",")
    }

    pub fn write_csv<W: Write>(mut w: W, rows: &[ReportRow]) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in rows {
            writeln!(w, "{}", r.to_csv())?;
        }
        Ok(())
    }
}
