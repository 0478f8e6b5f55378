use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    TwoLevel,
    Recursive,
    Bicriteria,
    SvdOracle,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::TwoLevel => "two_level",
            Algorithm::Recursive => "recursive",
            Algorithm::Bicriteria => "bicriteria",
            Algorithm::SvdOracle => "svd_oracle",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_level" => Ok(Algorithm::TwoLevel),
            "recursive" => Ok(Algorithm::Recursive),
            "bicriteria" => Ok(Algorithm::Bicriteria),
            "svd_oracle" => Ok(Algorithm::SvdOracle),
            other => Err(Error::param(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// How norm-estimation budgets scale with the dimension they sample along.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum BudgetRule {
    /// Two-level: `eps * d^0.34 / ln d`. Recursive: `d^gamma`.
    Paper,
    /// Two-level: `coef * d^0.34`. Recursive: `coef * d^gamma`.
    Power { coef: f64 },
}

/// Parameters shared by the drivers.
///
/// [`LraConfig::new`] gives the textbook constants. At desk sizes those
/// constants make every sketch at least as large as the matrix, so every stage
/// degrades to the identity and the whole matrix is read; [`LraConfig::desk`]
/// is the calibrated profile under which the sketches are genuinely smaller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LraConfig {
    pub k: usize,
    pub eps: f64,
    /// Column-estimation budget override (two-level).
    pub b1: Option<usize>,
    /// Row-estimation budget override (two-level).
    pub b2: Option<usize>,
    pub budget: BudgetRule,
    pub gamma: f64,
    pub depth_2r: usize,
    pub c_pcp: f64,
    pub c_cw: f64,
    pub s_reg: Option<usize>,
    /// Median repetitions of the norm estimator; `None` means `ceil(8 ln len)`.
    pub repetitions: Option<usize>,
    pub floor_mix: f64,
    /// PCP failure probability; `None` means `1/10` (two-level) or `1/N^4` (recursive).
    pub delta: Option<f64>,
    /// Oversampling constant of the PSD column sampler used by the bicriteria driver.
    pub c_psd: f64,
    pub seed: u64,
    pub dense_cap: usize,
}

impl LraConfig {
    pub fn new(k: usize, eps: f64) -> Self {
        Self {
            k,
            eps,
            b1: None,
            b2: None,
            budget: BudgetRule::Paper,
            gamma: 0.25,
            depth_2r: 4,
            c_pcp: 4.0,
            c_cw: 8.0,
            s_reg: None,
            repetitions: None,
            floor_mix: 0.0,
            delta: None,
            c_psd: 1.0,
            seed: 0,
            dense_cap: crate::DEFAULT_DENSE_CAP,
        }
    }

    /// Calibrated constants for matrices with a few thousand rows.
    pub fn desk(k: usize, eps: f64) -> Self {
        Self {
            budget: BudgetRule::Power { coef: 1.0 },
            c_pcp: 3e-4,
            s_reg: Some(6 * k),
            repetitions: Some(3),
            floor_mix: 1e-6,
            ..Self::new(k, eps)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if self.k == 0 || self.k > m.min(n) {
            return Err(Error::param(format!("k must lie in 1..={}, got {}", m.min(n), self.k)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::param(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if self.depth_2r < 2 || self.depth_2r % 2 != 0 {
            return Err(Error::param(format!(
                "depth_2r must be even and at least 2, got {}",
                self.depth_2r
            )));
        }
        if !(self.gamma > 0.0 && self.gamma <= 0.5) {
            return Err(Error::param(format!("gamma must lie in (0, 0.5], got {}", self.gamma)));
        }
        if !(self.c_pcp > 0.0 && self.c_cw > 0.0 && self.c_psd > 0.0) {
            return Err(Error::param("constants c_pcp, c_cw and c_psd must be positive"));
        }
        if !(0.0..1.0).contains(&self.floor_mix) {
            return Err(Error::param("floor_mix must lie in [0, 1)"));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::param("delta must lie in (0, 1)"));
            }
        }
        if self.repetitions == Some(0) {
            return Err(Error::param("repetitions must be at least 1"));
        }
        if let Some(b) = self.b1.into_iter().chain(self.b2).find(|&b| b == 0) {
            return Err(Error::param(format!("budgets must be positive, got {b}")));
        }
        Ok(())
    }

    /// Two-level budget for estimation along an axis of length `d`.
    pub(crate) fn two_level_budget(&self, d: usize) -> usize {
        let df = d.max(2) as f64;
        let b = match self.budget {
            BudgetRule::Paper => self.eps * df.powf(0.34) / df.ln(),
            BudgetRule::Power { coef } => coef * df.powf(0.34),
        };
        (b.round() as usize).clamp(1, d.max(1))
    }

    /// Recursive budget for estimation along an axis whose root length is `d`.
    pub(crate) fn recursive_budget(&self, d: usize) -> usize {
        let df = d.max(2) as f64;
        let b = match self.budget {
            BudgetRule::Paper => df.powf(self.gamma),
            BudgetRule::Power { coef } => coef * df.powf(self.gamma),
        };
        (b.round() as usize).clamp(1, d.max(1))
    }

    pub(crate) fn reps(&self, count: usize) -> usize {
        self.repetitions.unwrap_or_else(|| crate::normest::default_repetitions(count))
    }
}
