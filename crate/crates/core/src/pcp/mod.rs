//! Additive projection-cost preserving sketches.
//!
//! A column sketch keeps `t` columns drawn i.i.d. from a distribution `q`
//! built from coarse column-norm estimates and rescales column `j` by
//! `1 / sqrt(t q_j)`. For every rank-`k` projection `X` the sketch `C`
//! satisfies `||C - XC||^2 = ||A - XA||^2 ± eps ||A||^2` once `t` is of order
//! `m k^2 / (b eps^2) * log(m / delta)`. Row sketches are the transpose.
//!
//! Sketches are lazy: a [`SampledSketch`] is only a descriptor (indices,
//! scales, weight classes). Composing descriptors onto a [`SketchView`] gives a
//! matrix whose entries are root-oracle entries times the accumulated scales;
//! nothing is read until an entry is requested.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metricspace::MatrixAccess;
use crate::normest::{NormEstimates, Side};
use crate::rng::stream;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    pub probs: Vec<f64>,
    pub floor_mix: f64,
    /// Axis of the estimates this distribution was built from.
    pub side: Side,
}

/// `q_j = (1 - floor_mix) X_j / sum(X) + floor_mix / len`.
pub fn build_distribution(est: &NormEstimates, floor_mix: f64) -> Result<SamplingDistribution> {
    if !(0.0..1.0).contains(&floor_mix) {
        return Err(Error::param(format!("floor_mix must lie in [0, 1), got {floor_mix}")));
    }
    let len = est.values.len();
    if len == 0 {
        return Err(Error::param("cannot build a distribution over zero items"));
    }
    if est.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::param("norm estimates must be finite and nonnegative"));
    }
    let total: f64 = est.values.iter().sum();
    let uniform = 1.0 / len as f64;
    let probs: Vec<f64> = if total > 0.0 {
        est.values
            .iter()
            .map(|v| (1.0 - floor_mix) * v / total + floor_mix * uniform)
            .collect()
    } else if floor_mix > 0.0 {
        vec![uniform; len]
    } else {
        return Err(Error::DegenerateDistribution);
    };
    Ok(SamplingDistribution {
        probs,
        floor_mix,
        side: est.side,
    })
}

/// Number of weight classes allowed above the smallest one: `ceil(log_{1+eps}(N^4)) + 1`.
pub fn class_span(eps: f64, n_max: usize) -> i32 {
    (4.0 * (n_max.max(2) as f64).ln() / eps.ln_1p()).ceil() as i32 + 1
}

/// Weight class of each sample: `floor(log_{1+eps}(1 / sqrt(q_j)))`, with
/// outliers above `g_min + class_span` clamped into the top class.
pub fn partition_weight_classes(inv_sqrt_q: &[f64], eps: f64, n_max: usize) -> Vec<i32> {
    let raw: Vec<i32> = inv_sqrt_q
        .iter()
        .map(|&s| {
            debug_assert!(s > 0.0);
            // Nudge exact powers of (1 + eps) into the class they open.
            (s.ln() / eps.ln_1p() + 1e-9).floor() as i32
        })
        .collect();
    let Some(&g_min) = raw.iter().min() else {
        return raw;
    };
    let g_max = g_min + class_span(eps, n_max);
    raw.into_iter().map(|g| g.min(g_max)).collect()
}

/// Descriptor of one sampling stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSketch {
    pub side: Side,
    pub t: usize,
    pub seed: u64,
    pub indices: Vec<usize>,
    pub scales: Vec<f64>,
    pub classes: Vec<i32>,
}

impl SampledSketch {
    /// Keeps every index once with scale 1 and a single weight class.
    pub fn identity(side: Side, len: usize) -> Self {
        Self {
            side,
            t: len,
            seed: 0,
            indices: (0..len).collect(),
            scales: vec![1.0; len],
            classes: vec![0; len],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.indices.iter().enumerate().all(|(i, &j)| i == j)
            && self.scales.iter().all(|&s| s == 1.0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Number of distinct weight classes.
    pub fn class_count(&self) -> usize {
        let mut c = self.classes.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }
}

fn sample_axis(
    side: Side,
    len: usize,
    dist: &SamplingDistribution,
    t: usize,
    eps: f64,
    seed: u64,
    n_max: usize,
) -> Result<SampledSketch> {
    if t == 0 {
        return Err(Error::param("sample count t must be at least 1"));
    }
    if !(eps > 0.0) {
        return Err(Error::param("eps must be positive"));
    }
    if dist.probs.len() != len {
        return Err(Error::param(format!(
            "distribution has {} entries but the sampled axis has {len}",
            dist.probs.len()
        )));
    }
    let table = WeightedIndex::new(&dist.probs).map_err(|_| Error::DegenerateDistribution)?;
    let mut rng = stream(seed, &[0x5ca1e, side.tag()]);
    let indices: Vec<usize> = (0..t).map(|_| table.sample(&mut rng)).collect();
    let inv_sqrt_q: Vec<f64> = indices.iter().map(|&j| 1.0 / dist.probs[j].sqrt()).collect();
    let scales = inv_sqrt_q.iter().map(|s| s / (t as f64).sqrt()).collect();
    let classes = partition_weight_classes(&inv_sqrt_q, eps, n_max);
    Ok(SampledSketch {
        side,
        t,
        seed,
        indices,
        scales,
        classes,
    })
}

/// Samples `t` columns of `parent` i.i.d. from `dist`. Reads no entries.
pub fn sample_column_pcp(
    parent: &SketchView,
    dist: &SamplingDistribution,
    t: usize,
    eps: f64,
    seed: u64,
) -> Result<SampledSketch> {
    sample_axis(Side::Columns, parent.cols(), dist, t, eps, seed, parent.root_dim_max())
}

/// Samples `t` rows of `parent` i.i.d. from `dist`. Reads no entries.
pub fn sample_row_pcp(
    parent: &SketchView,
    dist: &SamplingDistribution,
    t: usize,
    eps: f64,
    seed: u64,
) -> Result<SampledSketch> {
    sample_axis(Side::Rows, parent.rows(), dist, t, eps, seed, parent.root_dim_max())
}

/// Sample count for an additive PCP along one axis:
/// `ceil(c_pcp * other * k^2 / (b eps^2) * ln(other / delta))`, where `other` is
/// the length of the sampled vectors and `b` the norm-estimation budget.
pub fn pcp_sample_size(other: usize, k: usize, b: usize, eps: f64, delta: f64, c_pcp: f64) -> usize {
    let other = other.max(2) as f64;
    let t = c_pcp * other * (k * k) as f64 / (b.max(1) as f64 * eps * eps) * (other / delta).ln();
    t.ceil().max(1.0) as usize
}

#[derive(Debug, Clone)]
struct AxisMap {
    index: Vec<usize>,
    scale: Vec<f64>,
    /// Weight class at every sampling level along this axis.
    classes: Vec<Vec<i32>>,
}

impl AxisMap {
    fn identity(len: usize) -> Self {
        Self {
            index: (0..len).collect(),
            scale: vec![1.0; len],
            classes: vec![Vec::new(); len],
        }
    }

    fn compose(&self, s: &SampledSketch) -> Result<Self> {
        let len = self.index.len();
        if let Some(&bad) = s.indices.iter().find(|&&j| j >= len) {
            return Err(Error::param(format!("sketch index {bad} out of range {len}")));
        }
        Ok(Self {
            index: s.indices.iter().map(|&j| self.index[j]).collect(),
            scale: s
                .indices
                .iter()
                .zip(&s.scales)
                .map(|(&j, &sc)| self.scale[j] * sc)
                .collect(),
            classes: s
                .indices
                .iter()
                .zip(&s.classes)
                .map(|(&j, &g)| {
                    let mut c = self.classes[j].clone();
                    c.push(g);
                    c
                })
                .collect(),
        })
    }

    fn blocks(&self) -> Vec<Vec<usize>> {
        let mut groups: BTreeMap<&[i32], Vec<usize>> = BTreeMap::new();
        for (i, c) in self.classes.iter().enumerate() {
            groups.entry(c.as_slice()).or_default().push(i);
        }
        groups.into_values().collect()
    }
}

/// A root matrix seen through a chain of row and column sketches.
#[derive(Clone)]
pub struct SketchView {
    root: Arc<dyn MatrixAccess>,
    rows: AxisMap,
    cols: AxisMap,
    level: usize,
}

impl std::fmt::Debug for SketchView {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SketchView")
            .field("rows", &self.rows.index.len())
            .field("cols", &self.cols.index.len())
            .field("level", &self.level)
            .finish()
    }
}

impl SketchView {
    pub fn root(root: Arc<dyn MatrixAccess>) -> Self {
        let (m, n) = (root.rows(), root.cols());
        Self {
            root,
            rows: AxisMap::identity(m),
            cols: AxisMap::identity(n),
            level: 0,
        }
    }

    /// Applies one more sampling stage.
    pub fn compose(&self, sketch: &SampledSketch) -> Result<Self> {
        let (rows, cols) = match sketch.side {
            Side::Rows => (self.rows.compose(sketch)?, self.cols.clone()),
            Side::Columns => (self.rows.clone(), self.cols.compose(sketch)?),
        };
        Ok(Self {
            root: self.root.clone(),
            rows,
            cols,
            level: self.level + 1,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn root_dim_max(&self) -> usize {
        self.root.rows().max(self.root.cols())
    }

    pub fn root_matrix(&self) -> &Arc<dyn MatrixAccess> {
        &self.root
    }

    /// Root row index and accumulated scale of sketch row `i`.
    pub fn row_source(&self, i: usize) -> (usize, f64) {
        (self.rows.index[i], self.rows.scale[i])
    }

    pub fn col_source(&self, j: usize) -> (usize, f64) {
        (self.cols.index[j], self.cols.scale[j])
    }

    /// Rows grouped by their weight-class history (one block when unsampled).
    pub fn row_blocks(&self) -> Vec<Vec<usize>> {
        self.rows.blocks()
    }

    pub fn col_blocks(&self) -> Vec<Vec<usize>> {
        self.cols.blocks()
    }

    /// Evaluates every entry; fails if `rows * cols` exceeds `cap`.
    pub fn materialize(&self, cap: usize) -> Result<DMatrix<f64>> {
        materialize(self, cap)
    }
}

impl MatrixAccess for SketchView {
    fn rows(&self) -> usize {
        self.rows.index.len()
    }

    fn cols(&self) -> usize {
        self.cols.index.len()
    }

    fn entry(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i, j)?;
        let v = self.root.entry(self.rows.index[i], self.cols.index[j])?;
        Ok(v * self.rows.scale[i] * self.cols.scale[j])
    }

    fn entries_read(&self) -> u64 {
        self.root.entries_read()
    }
}

/// Dense evaluation of any matrix behind [`MatrixAccess`], refusing more than `cap` entries.
pub fn materialize<A: MatrixAccess + ?Sized>(a: &A, cap: usize) -> Result<DMatrix<f64>> {
    let (m, n) = (a.rows(), a.cols());
    let entries = m.saturating_mul(n);
    if entries > cap {
        return Err(Error::DenseCapExceeded { entries, cap });
    }
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| a.read_column(j))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(m, n, |i, j| columns[j][i]))
}
