//! Instance generators.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{DistanceOracle, Metric, PointSet};
use crate::rng::stream;
use crate::{Error, Result};

/// Two point sets drawn around shared cluster centers.
///
/// Centers are uniform in `[0, 1]^dim`; every point picks a center uniformly
/// and adds independent Gaussian noise with standard deviation `spread` per
/// coordinate. `spread = 0` collapses every cluster onto its center.
pub fn gen_clustered(
    m: usize,
    n: usize,
    k_clusters: usize,
    dim: usize,
    spread: f64,
    seed: u64,
) -> Result<(PointSet, PointSet)> {
    if m == 0 || n == 0 || dim == 0 {
        return Err(Error::param("m, n and dim must be positive"));
    }
    if k_clusters == 0 || k_clusters > m.min(n) {
        return Err(Error::param(format!(
            "k_clusters must lie in 1..={}, got {k_clusters}",
            m.min(n)
        )));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::param("spread must be a finite nonnegative number"));
    }
    let mut rng = stream(seed, &[0xc1u64]);
    let centers: Vec<f64> = (0..k_clusters * dim).map(|_| rng.random::<f64>()).collect();
    let noise = Normal::new(0.0, spread).map_err(|e| Error::param(e.to_string()))?;
    let mut draw = |count: usize| -> Vec<f64> {
        let mut coords = Vec::with_capacity(count * dim);
        for _ in 0..count {
            let c = rng.random_range(0..k_clusters);
            for d in 0..dim {
                coords.push(centers[c * dim + d] + noise.sample(&mut rng));
            }
        }
        coords
    };
    let p = draw(m);
    let q = draw(n);
    Ok((
        PointSet::new(dim, p, format!("clustered-p-{seed}"))?,
        PointSet::new(dim, q, format!("clustered-q-{seed}"))?,
    ))
}

/// Two point sets uniform in `[0, 1]^dim`.
pub fn gen_uniform(m: usize, n: usize, dim: usize, seed: u64) -> Result<(PointSet, PointSet)> {
    if m == 0 || n == 0 || dim == 0 {
        return Err(Error::param("m, n and dim must be positive"));
    }
    let mut rng = stream(seed, &[0x0fu64]);
    let mut draw = |count: usize| (0..count * dim).map(|_| rng.random::<f64>()).collect();
    let p = draw(m);
    let q = draw(n);
    Ok((
        PointSet::new(dim, p, format!("uniform-p-{seed}"))?,
        PointSet::new(dim, q, format!("uniform-q-{seed}"))?,
    ))
}

/// `m` and `n` copies of the origin; every distance is zero.
pub fn gen_zero(m: usize, n: usize, dim: usize) -> Result<(PointSet, PointSet)> {
    Ok((
        PointSet::new(dim, vec![0.0; m * dim], "zero-p")?,
        PointSet::new(dim, vec![0.0; n * dim], "zero-q")?,
    ))
}

/// The rank-2 l-infinity instance on which any relative-error algorithm must
/// read every entry.
///
/// `P` holds the `n` standard unit vectors, `Q` holds `n - 1` copies of the
/// origin plus one distinguished point `q = ±e_{special_row}` at a
/// seed-dependent column. `sign = +1` places a 2 in the special row (`q = -e`),
/// `sign = -1` places a 0 (`q = +e`). Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct HardInstanceSpec {
    pub n: usize,
    pub special_row: usize,
    pub sign: i8,
    pub seed: u64,
}

impl HardInstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::param("hard instance needs n >= 2"));
        }
        if self.special_row >= self.n {
            return Err(Error::param(format!(
                "special row {} out of range for n = {}",
                self.special_row, self.n
            )));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::param("sign must be +1 or -1"));
        }
        Ok(())
    }

    /// Column of the distinguished point in `Q`.
    pub fn distinguished_column(&self) -> usize {
        (crate::rng::derive_seed(self.seed, &[0x4a7du64]) % self.n as u64) as usize
    }

    /// The single entry that differs from 1.
    pub fn special_value(&self) -> f64 {
        if self.sign > 0 {
            2.0
        } else {
            0.0
        }
    }

    /// The explicit point sets of the construction (dimension `n`).
    pub fn points(&self) -> Result<(PointSet, PointSet)> {
        self.validate()?;
        let n = self.n;
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            p[i * n + i] = 1.0;
        }
        let mut q = vec![0.0; n * n];
        let jq = self.distinguished_column();
        q[jq * n + self.special_row] = -f64::from(self.sign);
        Ok((
            PointSet::new(n, p, "hard-p")?,
            PointSet::new(n, q, "hard-q")?,
        ))
    }

    /// The distance matrix in closed form: all ones except one entry.
    pub fn matrix(&self) -> Result<DMatrix<f64>> {
        self.validate()?;
        let mut a = DMatrix::from_element(self.n, self.n, 1.0);
        a[(self.special_row, self.distinguished_column())] = self.special_value();
        Ok(a)
    }
}

/// Oracle over the hard l-infinity instance.
pub fn gen_linf_hard(spec: HardInstanceSpec) -> Result<DistanceOracle> {
    DistanceOracle::from_matrix(spec.matrix()?)
}

/// Convenience: the l-infinity distance matrix of [`HardInstanceSpec::points`].
pub fn hard_instance_from_points(spec: HardInstanceSpec) -> Result<DistanceOracle> {
    let (p, q) = spec.points()?;
    DistanceOracle::from_points(p.into(), q.into(), Metric::Linf)
}
