//! Monte Carlo estimators of the mean and of `q(z) = E ℛψ(x+z) ⊗ ℛψ(x)`,
//! averaged over samples and over base points `x`.

use nalgebra::SMatrix;

use crate::clifford::RealMat8;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, RealField8};

/// Running mean and variance of a fixed-size vector of statistics (Welford).
#[derive(Debug, Clone)]
struct Welford {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(len: usize) -> Self {
        Self { count: 0, mean: vec![0.0; len], m2: vec![0.0; len] }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let c = self.count as f64;
        for ((m, s), v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / c;
            *s += d * (v - *m);
        }
    }

    fn standard_errors(&self) -> Vec<f64> {
        let c = self.count as f64;
        self.m2.iter().map(|s| (s / (c - 1.0) / c).sqrt()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    /// Offset `z` in cells.
    pub offset: [i64; 3],
    pub mean: RealMat8,
    /// Standard error of each entry from the spread of per-sample spatial averages.
    pub standard_error: RealMat8,
}

/// Streaming estimator of `q(z)` at fixed cell offsets.
#[derive(Debug, Clone)]
pub struct CovarianceAccumulator {
    grid: GridSpec,
    offsets: Vec<[i64; 3]>,
    stats: Welford,
    shifted: Vec<f64>,
}

impl CovarianceAccumulator {
    pub fn new(grid: GridSpec, offsets: &[[i64; 3]]) -> Self {
        Self {
            grid,
            offsets: offsets.to_vec(),
            stats: Welford::new(64 * offsets.len()),
            shifted: vec![0.0; grid.len()],
        }
    }

    pub fn count(&self) -> usize {
        self.stats.count
    }

    pub fn add(&mut self, field: &RealField8) -> Result<()> {
        self.grid.ensure_same(field.grid())?;
        let n_inv = 1.0 / self.grid.len() as f64;
        let mut row = vec![0.0; 64 * self.offsets.len()];
        for (o, z) in self.offsets.iter().enumerate() {
            for a in 0..8 {
                shift_into(&self.grid, field.component(a), *z, &mut self.shifted);
                for b in 0..8 {
                    row[64 * o + 8 * a + b] = dot(&self.shifted, field.component(b)) * n_inv;
                }
            }
        }
        self.stats.push(&row);
        Ok(())
    }

    pub fn finish(&self) -> Result<Vec<CovarianceEstimate>> {
        if self.stats.count < 2 {
            return Err(Error::InsufficientSamples { required: 2, got: self.stats.count });
        }
        let se = self.stats.standard_errors();
        Ok(self
            .offsets
            .iter()
            .enumerate()
            .map(|(o, z)| CovarianceEstimate {
                offset: *z,
                mean: SMatrix::from_fn(|a, b| self.stats.mean[64 * o + 8 * a + b]),
                standard_error: SMatrix::from_fn(|a, b| se[64 * o + 8 * a + b]),
            })
            .collect())
    }
}

/// `dst(x) = src(x + z)` on the torus.
fn shift_into(grid: &GridSpec, src: &[f64], z: [i64; 3], dst: &mut [f64]) {
    let n = grid.n();
    let sh = z.map(|c| c.rem_euclid(n as i64) as usize);
    for i in 0..n {
        let si = (i + sh[0]) % n;
        for j in 0..n {
            let sj = (j + sh[1]) % n;
            let d = &mut dst[(i * n + j) * n..(i * n + j + 1) * n];
            let s = &src[(si * n + sj) * n..(si * n + sj + 1) * n];
            let split = n - sh[2];
            d[..split].copy_from_slice(&s[sh[2]..]);
            d[split..].copy_from_slice(&s[..sh[2]]);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// Covariance estimates at `offsets` from an in-memory list of samples.
pub fn empirical_covariance(samples: &[RealField8], offsets: &[[i64; 3]]) -> Result<Vec<CovarianceEstimate>> {
    let first = samples.first().ok_or(Error::InsufficientSamples { required: 2, got: 0 })?;
    let mut acc = CovarianceAccumulator::new(*first.grid(), offsets);
    for s in samples {
        acc.add(s)?;
    }
    acc.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimate {
    pub mean: [f64; 8],
    pub standard_error: [f64; 8],
    pub count: usize,
}

/// Per-component mean of `ℛψ` over samples and nodes.
pub fn empirical_mean<'a>(samples: impl IntoIterator<Item = &'a RealField8>) -> Result<MeanEstimate> {
    let mut stats = Welford::new(8);
    for s in samples {
        let n = s.grid().len() as f64;
        let row: Vec<f64> = (0..8).map(|j| s.component(j).iter().sum::<f64>() / n).collect();
        stats.push(&row);
    }
    if stats.count < 2 {
        return Err(Error::InsufficientSamples { required: 2, got: stats.count });
    }
    let se = stats.standard_errors();
    Ok(MeanEstimate {
        mean: std::array::from_fn(|j| stats.mean[j]),
        standard_error: std::array::from_fn(|j| se[j]),
        count: stats.count,
    })
}
