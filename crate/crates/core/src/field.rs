//! Reproducible sampling and the Karhunen–Loève expansion of a stationary
//! Gaussian field on a uniform 1D grid.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seeded random stream.
///
/// Backed by ChaCha8, which supports independent streams under one seed, so
/// workers can derive their own deterministic substreams from a root seed.
#[derive(Clone, Debug)]
pub struct Sampler {
    seed: u64,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent stream `index` under the same seed. Stream 0 is the root stream.
    pub fn substream(&self, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        Self { seed: self.seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn standard_normal(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.rng.sample(StandardNormal)).collect()
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// An immutable table of random draws, one row per realization.
///
/// Every fuzzy point is evaluated against the same rows, so differences
/// between points are not polluted by sampling noise.
#[derive(Clone, Debug, PartialEq)]
pub struct DrawSet {
    dim: usize,
    data: Vec<f64>,
}

impl DrawSet {
    /// `count` rows of `dim` independent standard normals.
    pub fn standard_normal(sampler: &mut Sampler, count: usize, dim: usize) -> Self {
        Self { dim, data: sampler.standard_normal(count * dim) }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: r.len() });
            }
            data.extend(r);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim.max(1))
    }
}

/// Parameters of `C(x1, x2) = exp(-|x1 - x2|^p / (2 ℓ²))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub exponent: f64,
    pub correlation_length: f64,
}

impl CovarianceSpec {
    pub fn new(exponent: f64, correlation_length: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::invalid(format!("covariance exponent {exponent} must be positive")));
        }
        if !(correlation_length > 0.0 && correlation_length.is_finite()) {
            return Err(Error::invalid(format!(
                "correlation length {correlation_length} must be positive"
            )));
        }
        Ok(Self { exponent, correlation_length })
    }

    /// Squared-exponential kernel with p = 2, ℓ = 20 μm.
    pub fn fiber_composite() -> Self {
        Self { exponent: 2.0, correlation_length: 20.0 }
    }
}

pub fn covariance(x1: f64, x2: f64, spec: &CovarianceSpec) -> f64 {
    let d = (x1 - x2).abs();
    (-d.powf(spec.exponent) / (2.0 * spec.correlation_length * spec.correlation_length)).exp()
}

/// Relative threshold below which negative eigenvalues count as rounding noise.
pub const EIGEN_CLIP: f64 = 1e-12;

/// Discrete Karhunen–Loève expansion on a uniform grid.
#[derive(Clone, Debug)]
pub struct KlExpansion {
    grid: Vec<f64>,
    spacing: f64,
    eigenvalues: Vec<f64>,
    // eigenfunctions[j][i] = φ_j(grid[i]), with spacing * Σ_i φ_j(x_i)² = 1
    eigenfunctions: Vec<Vec<f64>>,
    trace: f64,
}

impl KlExpansion {
    /// Nyström decomposition of `h · C(x_i, x_j)` with midpoint weight `h`.
    ///
    /// Eigenvalues come out descending; negatives above `-EIGEN_CLIP · λ_max`
    /// are clipped to zero, anything more negative is reported as an
    /// indefinite kernel.
    pub fn decompose(grid: &[f64], spec: &CovarianceSpec) -> Result<Self> {
        let n = grid.len();
        if n < 2 {
            return Err(Error::invalid(format!("KL grid needs at least 2 points, got {n}")));
        }
        let h = grid[1] - grid[0];
        if !(h > 0.0) {
            return Err(Error::invalid("KL grid must be strictly ascending"));
        }
        for w in grid.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
                return Err(Error::invalid("KL grid must be uniformly spaced"));
            }
        }
        let k = DMatrix::from_fn(n, n, |i, j| h * covariance(grid[i], grid[j], spec));
        let trace = k.trace();
        let eig = SymmetricEigen::new(k);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let lambda_max = eig.eigenvalues[order[0]].max(0.0);
        let mut eigenvalues = Vec::with_capacity(n);
        let mut eigenfunctions = Vec::with_capacity(n);
        let scale = 1.0 / h.sqrt();
        for &j in &order {
            let mut lambda = eig.eigenvalues[j];
            if lambda < 0.0 {
                if lambda < -EIGEN_CLIP * lambda_max {
                    return Err(Error::invalid(format!(
                        "covariance matrix is indefinite (eigenvalue {lambda})"
                    )));
                }
                lambda = 0.0;
            }
            eigenvalues.push(lambda);
            let v = eig.eigenvectors.column(j);
            // fix the sign so the largest-magnitude entry is positive
            let pivot = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            let sign = if pivot < 0.0 { -scale } else { scale };
            eigenfunctions.push(v.iter().map(|x| sign * x).collect());
        }
        Ok(Self { grid: grid.to_vec(), spacing: h, eigenvalues, eigenfunctions, trace })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenfunction(&self, j: usize) -> &[f64] {
        &self.eigenfunctions[j]
    }

    /// Trace of the weighted covariance matrix.
    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Smallest `m` whose leading eigenvalues hold at least `fraction` of the total.
    pub fn truncation_order(&self, fraction: f64) -> Result<usize> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::invalid(format!("variance fraction {fraction} outside (0, 1]")));
        }
        let total: f64 = self.eigenvalues.iter().sum();
        let mut acc = 0.0;
        for (j, l) in self.eigenvalues.iter().enumerate() {
            acc += l;
            if acc >= fraction * total {
                return Ok(j + 1);
            }
        }
        Ok(self.eigenvalues.len())
    }

    /// `Σ_{j<m} √λ_j φ_j(x) y_j` at every grid point, with `m = y.len()`.
    pub fn evaluate(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() > self.modes() {
            return Err(Error::DimensionMismatch { expected: self.modes(), found: y.len() });
        }
        let mut out = vec![0.0; self.grid.len()];
        for (j, &yj) in y.iter().enumerate() {
            let w = self.eigenvalues[j].sqrt() * yj;
            for (o, phi) in out.iter_mut().zip(&self.eigenfunctions[j]) {
                *o += w * phi;
            }
        }
        Ok(out)
    }

    /// Like [`evaluate`](Self::evaluate) but checks `y.len() == m`.
    pub fn evaluate_truncated(&self, m: usize, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: y.len() });
        }
        self.evaluate(y)
    }

    /// Variance of the `m`-term field at each grid point.
    pub fn pointwise_variance(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for j in 0..m.min(self.modes()) {
            for (o, phi) in out.iter_mut().zip(&self.eigenfunctions[j]) {
                *o += self.eigenvalues[j] * phi * phi;
            }
        }
        out
    }

    /// `count` field realizations with `m` modes, one row per realization.
    pub fn sample_fields(&self, sampler: &mut Sampler, m: usize, count: usize) -> Result<DrawSet> {
        if m > self.modes() {
            return Err(Error::DimensionMismatch { expected: self.modes(), found: m });
        }
        let mut rows = Vec::with_capacity(count);
        for _ in 0..count {
            let y = sampler.standard_normal(m);
            rows.push(self.evaluate(&y)?);
        }
        if rows.is_empty() {
            return Ok(DrawSet { dim: self.grid.len(), data: Vec::new() });
        }
        DrawSet::from_rows(rows)
    }

    /// Eigenpairs as CSV: `j,lambda,phi_1..phi_N`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,lambda");
        for i in 1..=self.grid.len() {
            out.push_str(&format!(",phi_{i}"));
        }
        out.push('\n');
        for (j, (l, phi)) in self.eigenvalues.iter().zip(&self.eigenfunctions).enumerate() {
            out.push_str(&format!("{},{l}", j + 1));
            for p in phi {
                out.push_str(&format!(",{p}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Cell midpoints `(j + 1/2) h` of `cells` uniform cells on `[0, length]`.
pub fn midpoint_grid(length: f64, cells: usize) -> Vec<f64> {
    let h = length / cells as f64;
    (0..cells).map(|j| (j as f64 + 0.5) * h).collect()
}
