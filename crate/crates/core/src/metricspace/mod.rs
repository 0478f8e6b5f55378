//! Point sets, metrics and lazily evaluated, access-counted distance matrices.

mod generate;
pub mod io;
mod triangle;

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use dashmap::DashMap;
use nalgebra::DMatrix;

use crate::{Error, Result};

pub use generate::{gen_clustered, gen_linf_hard, gen_uniform, gen_zero, hard_instance_from_points, HardInstanceSpec};
pub use triangle::{check_approx_triangle, TriangleCheck, TriangleReport};

/// A finite set of points with identical dimension and finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    pub label: String,
}

impl PointSet {
    /// Builds a point set from flat row-major coordinates.
    pub fn new(dim: usize, coords: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("point dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::param(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::param(format!(
                "non-finite coordinate in point {}",
                pos / dim
            )));
        }
        Ok(Self {
            dim,
            coords,
            label: label.into(),
        })
    }

    pub fn from_points(points: &[Vec<f64>], label: impl Into<String>) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| p.len() != dim) {
            return Err(Error::param(format!(
                "point {i} has dimension {} but point 0 has {dim}",
                p.len()
            )));
        }
        Self::new(dim, points.concat(), label)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// Distance functions between points of a [`PointSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    /// Squared Euclidean distance: the square of a metric, not a metric.
    SqEuclidean,
    L1,
    Linf,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Metric::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Metric::SqEuclidean => diffs.map(|d| d * d).sum(),
            Metric::L1 => diffs.sum(),
            Metric::Linf => diffs.fold(0.0, f64::max),
        }
    }

    /// True for the metrics that satisfy the triangle inequality exactly.
    pub fn is_metric(self) -> bool {
        !matches!(self, Metric::SqEuclidean)
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::SqEuclidean => "sqeuclidean",
            Metric::L1 => "l1",
            Metric::Linf => "linf",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "sqeuclidean" | "sq_euclidean" | "sq-euclidean" => Ok(Metric::SqEuclidean),
            "l1" | "manhattan" => Ok(Metric::L1),
            "linf" | "chebyshev" => Ok(Metric::Linf),
            other => Err(Error::param(format!("unknown metric `{other}`"))),
        }
    }
}

/// Read access to a (possibly implicit) real matrix.
///
/// `entries_read` reports the distinct-entry counter of the root oracle the
/// matrix is ultimately backed by, so that derived views (sketches, transposes,
/// the PSD part of a squared-distance matrix) charge the original budget.
pub trait MatrixAccess: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> Result<f64>;
    fn entries_read(&self) -> u64;

    fn read_row(&self, i: usize) -> Result<Vec<f64>> {
        (0..self.cols()).map(|j| self.entry(i, j)).collect()
    }

    fn read_column(&self, j: usize) -> Result<Vec<f64>> {
        (0..self.rows()).map(|i| self.entry(i, j)).collect()
    }

    fn check_index(&self, i: usize, j: usize) -> Result<()> {
        if i < self.rows() && j < self.cols() {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                row: i,
                col: j,
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }
}

impl<T: MatrixAccess + ?Sized> MatrixAccess for &T {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn entry(&self, i: usize, j: usize) -> Result<f64> {
        (**self).entry(i, j)
    }
    fn entries_read(&self) -> u64 {
        (**self).entries_read()
    }
}

impl<T: MatrixAccess + ?Sized> MatrixAccess for Arc<T> {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn entry(&self, i: usize, j: usize) -> Result<f64> {
        (**self).entry(i, j)
    }
    fn entries_read(&self) -> u64 {
        (**self).entries_read()
    }
}

/// A plain dense matrix behind the access trait. Reads are free and uncounted.
impl MatrixAccess for DMatrix<f64> {
    fn rows(&self) -> usize {
        self.nrows()
    }
    fn cols(&self) -> usize {
        self.ncols()
    }
    fn entry(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i, j)?;
        Ok(self[(i, j)])
    }
    fn entries_read(&self) -> u64 {
        0
    }
}

/// Transposed view.
pub struct Transposed<'a, A: ?Sized>(pub &'a A);

impl<A: MatrixAccess + ?Sized> MatrixAccess for Transposed<'_, A> {
    fn rows(&self) -> usize {
        self.0.cols()
    }
    fn cols(&self) -> usize {
        self.0.rows()
    }
    fn entry(&self, i: usize, j: usize) -> Result<f64> {
        self.0.entry(j, i)
    }
    fn entries_read(&self) -> u64 {
        self.0.entries_read()
    }
}

/// The submatrix picked out by a list of row indices and a list of column indices.
pub struct Restricted<'a, A: ?Sized> {
    pub parent: &'a A,
    pub rows: &'a [usize],
    pub cols: &'a [usize],
}

impl<A: MatrixAccess + ?Sized> MatrixAccess for Restricted<'_, A> {
    fn rows(&self) -> usize {
        self.rows.len()
    }
    fn cols(&self) -> usize {
        self.cols.len()
    }
    fn entry(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i, j)?;
        self.parent.entry(self.rows[i], self.cols[j])
    }
    fn entries_read(&self) -> u64 {
        self.parent.entries_read()
    }
}

/// Where a distance oracle gets its entries from.
#[derive(Debug, Clone)]
pub enum Source {
    Points {
        p: Arc<PointSet>,
        q: Arc<PointSet>,
        metric: Metric,
    },
    /// An explicit nonnegative matrix. Not validated as a metric.
    Explicit(Arc<DMatrix<f64>>),
}

/// Lazy, memoizing, access-counted distance matrix `A[i][j] = d(p_i, q_j)`.
///
/// Every entry is evaluated at most once; `entries_read` is the number of
/// distinct entries evaluated so far. The oracle can be shared across threads.
pub struct DistanceOracle {
    source: Source,
    m: usize,
    n: usize,
    memo: DashMap<u64, f64>,
    counter: AtomicU64,
    audit: Option<Mutex<HashSet<(usize, usize)>>>,
}

impl std::fmt::Debug for DistanceOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DistanceOracle")
            .field("m", &self.m)
            .field("n", &self.n)
            .field("entries_read", &self.entries_read())
            .finish()
    }
}

impl DistanceOracle {
    /// Distance matrix between `p` (rows) and `q` (columns).
    ///
    /// `SqEuclidean` is only accepted when both sides are the same point set.
    pub fn from_points(p: Arc<PointSet>, q: Arc<PointSet>, metric: Metric) -> Result<Self> {
        if p.is_empty() || q.is_empty() {
            return Err(Error::param("point sets must be non-empty"));
        }
        if p.dim() != q.dim() {
            return Err(Error::param(format!(
                "point sets have dimensions {} and {}",
                p.dim(),
                q.dim()
            )));
        }
        if metric == Metric::SqEuclidean && !(Arc::ptr_eq(&p, &q) || p == q) {
            return Err(Error::contract(
                "squared Euclidean oracles require P = Q",
            ));
        }
        let (m, n) = (p.len(), q.len());
        Ok(Self::with_source(Source::Points { p, q, metric }, m, n))
    }

    /// Square distance matrix of a point set against itself.
    pub fn symmetric(points: Arc<PointSet>, metric: Metric) -> Result<Self> {
        Self::from_points(points.clone(), points, metric)
    }

    pub fn from_matrix(a: DMatrix<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::param("explicit matrix must be non-empty"));
        }
        if let Some(v) = a.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::param(format!(
                "explicit distance matrices must be finite and nonnegative, found {v}"
            )));
        }
        let (m, n) = a.shape();
        Ok(Self::with_source(Source::Explicit(Arc::new(a)), m, n))
    }

    fn with_source(source: Source, m: usize, n: usize) -> Self {
        Self {
            source,
            m,
            n,
            memo: DashMap::new(),
            counter: AtomicU64::new(0),
            audit: None,
        }
    }

    /// Records every evaluated `(i, j)` in a shadow set, independently of the memo.
    pub fn with_audit(mut self) -> Self {
        self.audit = Some(Mutex::new(HashSet::new()));
        self
    }

    /// A new oracle over the same source with an empty memo and a zero counter.
    pub fn fresh(&self) -> Self {
        let mut o = Self::with_source(self.source.clone(), self.m, self.n);
        if self.audit.is_some() {
            o = o.with_audit();
        }
        o
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn metric(&self) -> Option<Metric> {
        match &self.source {
            Source::Points { metric, .. } => Some(*metric),
            Source::Explicit(_) => None,
        }
    }

    /// Size of the shadow set, if auditing is on.
    pub fn audited_reads(&self) -> Option<usize> {
        self.audit
            .as_ref()
            .map(|a| a.lock().expect("audit lock poisoned").len())
    }

    /// Whether the matrix is symmetric, decided from the source alone (no reads).
    pub fn structurally_symmetric(&self) -> bool {
        if self.m != self.n {
            return false;
        }
        match &self.source {
            Source::Points { p, q, .. } => Arc::ptr_eq(p, q) || p == q,
            Source::Explicit(a) => {
                (0..self.m).all(|i| (0..i).all(|j| a[(i, j)] == a[(j, i)]))
            }
        }
    }

    fn evaluate(&self, i: usize, j: usize) -> f64 {
        if let Some(audit) = &self.audit {
            audit.lock().expect("audit lock poisoned").insert((i, j));
        }
        match &self.source {
            Source::Points { p, q, metric } => metric.distance(p.point(i), q.point(j)),
            Source::Explicit(a) => a[(i, j)],
        }
    }

    /// The full matrix computed straight from the source, bypassing memo and counter.
    ///
    /// This is the verification path; algorithms never call it.
    pub fn dense_uncounted(&self) -> DMatrix<f64> {
        match &self.source {
            Source::Explicit(a) => (**a).clone(),
            Source::Points { p, q, metric } => DMatrix::from_fn(self.m, self.n, |i, j| {
                metric.distance(p.point(i), q.point(j))
            }),
        }
    }
}

impl MatrixAccess for DistanceOracle {
    fn rows(&self) -> usize {
        self.m
    }

    fn cols(&self) -> usize {
        self.n
    }

    fn entry(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i, j)?;
        let key = (i as u64) * (self.n as u64) + j as u64;
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let v = *self.memo.entry(key).or_insert_with(|| {
            self.counter.fetch_add(1, Ordering::Relaxed);
            self.evaluate(i, j)
        });
        Ok(v)
    }

    fn entries_read(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> Arc<PointSet> {
        Arc::new(PointSet::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0]], "e1").unwrap())
    }

    #[test]
    fn unit_displacement() {
        let o = DistanceOracle::symmetric(two_points(), Metric::Euclidean).unwrap();
        assert_eq!(o.entry(0, 1).unwrap(), 1.0);
        assert_eq!(o.entry(0, 0).unwrap(), 0.0);
    }

    #[test]
    fn single_point_is_zero_for_every_metric() {
        let p = Arc::new(PointSet::from_points(&[vec![0.3, -2.0, 5.0]], "x").unwrap());
        for metric in [Metric::Euclidean, Metric::SqEuclidean, Metric::L1, Metric::Linf] {
            let o = DistanceOracle::symmetric(p.clone(), metric).unwrap();
            assert_eq!(o.entry(0, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn squared_euclidean_entries() {
        let o = DistanceOracle::symmetric(two_points(), Metric::SqEuclidean).unwrap();
        assert_eq!(o.entry(0, 1).unwrap(), 1.0);
        assert_eq!(o.entry(1, 0).unwrap(), 1.0);
    }

    #[test]
    fn squared_euclidean_needs_identical_sets() {
        let q = Arc::new(PointSet::from_points(&[vec![2.0, 0.0]], "q").unwrap());
        let err = DistanceOracle::from_points(two_points(), q, Metric::SqEuclidean);
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn out_of_range_is_a_bounds_error() {
        let o = DistanceOracle::symmetric(two_points(), Metric::L1).unwrap();
        assert!(matches!(o.entry(2, 0), Err(Error::OutOfBounds { .. })));
        assert!(matches!(o.read_row(5), Err(Error::OutOfBounds { .. })));
        assert!(matches!(o.read_column(2), Err(Error::OutOfBounds { .. })));
        assert_eq!(o.entries_read(), 0);
    }

    #[test]
    fn row_reads_are_counted_once() {
        let p = Arc::new(PointSet::from_points(&vec![vec![1.0, 1.0]; 3], "same").unwrap());
        let o = DistanceOracle::symmetric(p, Metric::Euclidean).unwrap();
        assert_eq!(o.read_row(1).unwrap(), vec![0.0; 3]);
        assert_eq!(o.entries_read(), 3);
        o.read_row(1).unwrap();
        assert_eq!(o.entries_read(), 3);
        o.read_column(0).unwrap();
        // (1, 0) was already read
        assert_eq!(o.entries_read(), 5);
    }

    #[test]
    fn fresh_oracle_and_read_row_counts_n() {
        let o = DistanceOracle::from_matrix(DMatrix::from_element(4, 7, 2.0)).unwrap();
        o.read_row(0).unwrap();
        assert_eq!(o.entries_read(), 7);
        let f = o.fresh();
        assert_eq!(f.entries_read(), 0);
    }

    #[test]
    fn counter_matches_shadow_set_under_concurrency() {
        use rayon::prelude::*;
        let (p, q) = gen_clustered(40, 30, 3, 2, 0.1, 5).unwrap();
        let o = DistanceOracle::from_points(Arc::new(p), Arc::new(q), Metric::L1)
            .unwrap()
            .with_audit();
        (0..2000usize).into_par_iter().for_each(|t| {
            let i = (t * 7919) % 40;
            let j = (t * 104_729) % 30;
            o.entry(i, j).unwrap();
        });
        assert_eq!(o.entries_read() as usize, o.audited_reads().unwrap());
    }

    #[test]
    fn repeated_reads_are_bit_identical() {
        let (p, q) = gen_clustered(10, 10, 2, 4, 0.5, 1).unwrap();
        let o = DistanceOracle::from_points(Arc::new(p), Arc::new(q), Metric::Euclidean).unwrap();
        let first: Vec<u64> = (0..10).map(|j| o.entry(3, j).unwrap().to_bits()).collect();
        let again: Vec<u64> = (0..10).map(|j| o.entry(3, j).unwrap().to_bits()).collect();
        assert_eq!(first, again);
        let fresh = o.fresh();
        let third: Vec<u64> = (0..10).map(|j| fresh.entry(3, j).unwrap().to_bits()).collect();
        assert_eq!(first, third);
    }

    #[test]
    fn explicit_matrix_must_be_nonnegative() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert!(DistanceOracle::from_matrix(a).is_err());
    }

    #[test]
    fn transposed_and_restricted_views() {
        let a = DMatrix::from_fn(3, 4, |i, j| (10 * i + j) as f64);
        let o = DistanceOracle::from_matrix(a).unwrap();
        let t = Transposed(&o);
        assert_eq!((t.rows(), t.cols()), (4, 3));
        assert_eq!(t.entry(3, 2).unwrap(), 23.0);
        let rows = [2, 0];
        let cols = [1, 3];
        let r = Restricted { parent: &o, rows: &rows, cols: &cols };
        assert_eq!(r.entry(0, 1).unwrap(), 23.0);
        assert_eq!(r.entry(1, 0).unwrap(), 1.0);
        assert!(r.entry(2, 0).is_err());
        // (2, 3) was already read through the transpose.
        assert_eq!(o.entries_read(), 2);
    }

    #[test]
    fn ragged_points_are_rejected() {
        assert!(PointSet::from_points(&[vec![1.0], vec![1.0, 2.0]], "x").is_err());
        assert!(PointSet::new(2, vec![1.0, f64::NAN], "x").is_err());
    }
}
