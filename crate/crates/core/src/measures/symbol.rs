//! Covariance symbols `q̂(k)`: closed-form models and tabulated values on a grid.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{Mat8, Vec8, WaveVector};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

fn one() -> f64 {
    1.0
}

fn ones8() -> [f64; 8] {
    [1.0; 8]
}

/// Relative level at which the Gaussian correlation is treated as zero when a
/// finite correlation range is needed.
pub const GAUSSIAN_RANGE_LEVEL: f64 = 1e-12;

/// Closed-form translation-invariant covariance symbols, all diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolModel {
    Zero,
    /// `amplitude·I`: white noise.
    Flat {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude·exp(−|k|²/2κ²)·diag(weights)`.
    GaussianBump {
        #[serde(default = "one")]
        kappa: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "ones8")]
        weights: [f64; 8],
    },
}

impl Default for SymbolModel {
    fn default() -> Self {
        SymbolModel::GaussianBump { kappa: 1.0, amplitude: 1.0, weights: [1.0; 8] }
    }
}

impl SymbolModel {
    /// Gaussian bump acting on the real parts only, `g(k)·diag(1,1,1,1,0,0,0,0)`.
    pub fn real_part_bump(kappa: f64, amplitude: f64) -> Self {
        let mut weights = [0.0; 8];
        weights[..4].fill(1.0);
        SymbolModel::GaussianBump { kappa, amplitude, weights }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Error::InvalidArgument(format!("symbol {what} must be nonnegative and finite, got {v}"))
        };
        match *self {
            SymbolModel::Zero => Ok(()),
            SymbolModel::Flat { amplitude } => {
                if amplitude >= 0.0 && amplitude.is_finite() {
                    Ok(())
                } else {
                    Err(bad("amplitude", amplitude))
                }
            }
            SymbolModel::GaussianBump { kappa, amplitude, weights } => {
                if !(kappa > 0.0) || !kappa.is_finite() {
                    return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
                }
                if !(amplitude >= 0.0) || !amplitude.is_finite() {
                    return Err(bad("amplitude", amplitude));
                }
                match weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
                    Some(&w) => Err(bad("weight", w)),
                    None => Ok(()),
                }
            }
        }
    }

    pub fn diagonal(&self, k: &WaveVector) -> [f64; 8] {
        match *self {
            SymbolModel::Zero => [0.0; 8],
            SymbolModel::Flat { amplitude } => [amplitude; 8],
            SymbolModel::GaussianBump { kappa, amplitude, weights } => {
                let g = amplitude * (-0.5 * k.norm_squared() / (kappa * kappa)).exp();
                weights.map(|w| g * w)
            }
        }
    }

    pub fn eval(&self, k: &WaveVector) -> Mat8 {
        diag_matrix(&self.diagonal(k))
    }

    /// Radius beyond which `q₀(z)` vanishes; for the Gaussian bump, the radius
    /// where it drops below [`GAUSSIAN_RANGE_LEVEL`] of its peak.
    pub fn correlation_range(&self) -> f64 {
        match *self {
            SymbolModel::Zero | SymbolModel::Flat { .. } => 0.0,
            SymbolModel::GaussianBump { kappa, .. } => (2.0 * (1.0 / GAUSSIAN_RANGE_LEVEL).ln()).sqrt() / kappa,
        }
    }

    /// Continuum position-space covariance `q₀(z)` (diagonal entries). The flat
    /// model has no pointwise value and returns `None`.
    pub fn continuum_covariance(&self, z: &WaveVector) -> Option<[f64; 8]> {
        match *self {
            SymbolModel::Zero => Some([0.0; 8]),
            SymbolModel::Flat { .. } => None,
            SymbolModel::GaussianBump { kappa, amplitude, weights } => {
                let k2 = kappa * kappa;
                let g =
                    amplitude * (k2 / (2.0 * std::f64::consts::PI)).powf(1.5) * (-0.5 * k2 * z.norm_squared()).exp();
                Some(weights.map(|w| g * w))
            }
        }
    }

    /// Samples the model at every grid wave vector.
    pub fn on_grid(&self, grid: GridSpec) -> Result<GridSymbol> {
        self.validate()?;
        let values = (0..grid.len()).map(|idx| self.diagonal(&grid.wave_vector(idx))).collect();
        GridSymbol::diagonal(grid, values, self.correlation_range())
    }
}

pub fn diag_matrix(d: &[f64; 8]) -> Mat8 {
    Mat8::from_fn(|i, j| if i == j { Complex64::new(d[i], 0.0) } else { Complex64::default() })
}

#[derive(Debug, Clone, PartialEq)]
enum Values {
    Diagonal(Vec<[f64; 8]>),
    Full(Vec<Mat8>),
}

/// A covariance symbol tabulated on every mode of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSymbol {
    grid: GridSpec,
    values: Values,
    correlation_range: f64,
}

impl GridSymbol {
    pub fn diagonal(grid: GridSpec, values: Vec<[f64; 8]>, correlation_range: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument("symbol table length does not match grid".into()));
        }
        Ok(Self { grid, values: Values::Diagonal(values), correlation_range })
    }

    pub fn full(grid: GridSpec, values: Vec<Mat8>, correlation_range: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument("symbol table length does not match grid".into()));
        }
        Ok(Self { grid, values: Values::Full(values), correlation_range })
    }

    /// Tabulates `f(k)` at the true grid wave vectors.
    pub fn from_fn(grid: GridSpec, correlation_range: f64, f: impl Fn(&WaveVector) -> Mat8) -> Self {
        let values = (0..grid.len()).map(|idx| f(&grid.wave_vector(idx))).collect();
        Self { grid, values: Values::Full(values), correlation_range }
    }

    pub fn identity(grid: GridSpec) -> Self {
        Self { grid, values: Values::Diagonal(vec![[1.0; 8]; grid.len()]), correlation_range: 0.0 }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn correlation_range(&self) -> f64 {
        self.correlation_range
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.values, Values::Diagonal(_))
    }

    pub fn mode(&self, idx: usize) -> Mat8 {
        match &self.values {
            Values::Diagonal(d) => diag_matrix(&d[idx]),
            Values::Full(m) => m[idx],
        }
    }

    pub fn apply(&self, idx: usize, v: &Vec8) -> Vec8 {
        match &self.values {
            Values::Diagonal(d) => Vec8::from_fn(|i, _| v[i] * d[idx][i]),
            Values::Full(m) => m[idx] * v,
        }
    }

    pub fn trace(&self, idx: usize) -> f64 {
        match &self.values {
            Values::Diagonal(d) => d[idx].iter().sum(),
            Values::Full(m) => m[idx].trace().re,
        }
    }

    /// `e₀ = (2π)⁻³ ∫ tr q̂(k) dk` as a grid sum, the mean charge density `E|ψ(x)|²`.
    pub fn trace_integral(&self) -> f64 {
        let sum: f64 = (0..self.grid.len()).map(|idx| self.trace(idx)).sum();
        sum / self.grid.length().powi(3)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let values = match &self.values {
            Values::Diagonal(d) => Values::Diagonal(d.iter().map(|v| v.map(|x| x * s)).collect()),
            Values::Full(m) => Values::Full(m.iter().map(|x| x * Complex64::new(s, 0.0)).collect()),
        };
        Self { grid: self.grid, values, correlation_range: self.correlation_range }
    }

    /// Most negative eigenvalue over all modes, with its mode index.
    pub fn min_eigenvalue(&self) -> (usize, f64) {
        let mut worst = (0, f64::INFINITY);
        for idx in 0..self.grid.len() {
            let lo = match &self.values {
                Values::Diagonal(d) => d[idx].iter().cloned().fold(f64::INFINITY, f64::min),
                Values::Full(m) => hermitian_eigenvalues(&m[idx]).iter().cloned().fold(f64::INFINITY, f64::min),
            };
            if lo < worst.1 {
                worst = (idx, lo);
            }
        }
        worst
    }

    /// Fails if any mode has an eigenvalue below `−1e−12·max(1, λ_max)`.
    pub fn check_psd(&self) -> Result<()> {
        self.sqrt().map(|_| ())
    }

    /// Hermitian square root per mode. Small negative eigenvalues from rounding
    /// are clamped to zero; anything below `−1e−12·max(1, λ_max)` is an error.
    pub fn sqrt(&self) -> Result<GridSymbol> {
        let values = match &self.values {
            Values::Diagonal(d) => {
                let mut out = Vec::with_capacity(d.len());
                for (idx, v) in d.iter().enumerate() {
                    let top = v.iter().cloned().fold(0.0, f64::max);
                    let mut r = [0.0; 8];
                    for (x, y) in v.iter().zip(r.iter_mut()) {
                        *y = clamped_sqrt(*x, top).ok_or_else(|| self.not_psd(idx, *x))?;
                    }
                    out.push(r);
                }
                Values::Diagonal(out)
            }
            Values::Full(m) => {
                let mut out = Vec::with_capacity(m.len());
                for (idx, q) in m.iter().enumerate() {
                    out.push(hermitian_sqrt(q).map_err(|e| self.not_psd(idx, e))?);
                }
                // restore q̂(−k) = conj q̂(k) exactly so real noise stays real
                let sym = (0..out.len())
                    .map(|idx| (out[idx] + out[self.grid.negated_index(idx)].conjugate()) * Complex64::new(0.5, 0.0))
                    .collect();
                Values::Full(sym)
            }
        };
        Ok(GridSymbol { grid: self.grid, values, correlation_range: self.correlation_range })
    }

    fn not_psd(&self, idx: usize, eigenvalue: f64) -> Error {
        let k = self.grid.wave_vector(idx);
        Error::NotPositiveSemidefinite { k: [k[0], k[1], k[2]], eigenvalue }
    }

    /// `max |q̂(k) − q̂(k)^†|` over modes.
    pub fn hermitian_defect(&self) -> f64 {
        match &self.values {
            Values::Diagonal(_) => 0.0,
            Values::Full(m) => m.iter().map(|q| max_entry(&(q - q.adjoint()))).fold(0.0, f64::max),
        }
    }

    /// `max |q̂(−k) − conj q̂(k)|` over modes, zero when `q(z)` is real.
    pub fn realness_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|idx| max_entry(&(self.mode(self.grid.negated_index(idx)) - self.mode(idx).conjugate())))
            .fold(0.0, f64::max)
    }
}

fn max_entry(m: &Mat8) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn clamped_sqrt(x: f64, top: f64) -> Option<f64> {
    if x >= 0.0 {
        Some(x.sqrt())
    } else if x >= -1e-12 * top.max(1.0) {
        Some(0.0)
    } else {
        None
    }
}

pub fn hermitian_eigenvalues(q: &Mat8) -> [f64; 8] {
    let h = (q + q.adjoint()) * Complex64::new(0.5, 0.0);
    let ev = SymmetricEigen::new(h).eigenvalues;
    std::array::from_fn(|i| ev[i])
}

/// Hermitian square root of a PSD matrix; on failure returns the offending eigenvalue.
pub fn hermitian_sqrt(q: &Mat8) -> std::result::Result<Mat8, f64> {
    let h = (q + q.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut roots = [0.0; 8];
    for (r, &l) in roots.iter_mut().zip(eig.eigenvalues.iter()) {
        *r = clamped_sqrt(l, top).ok_or(l)?;
    }
    let v = &eig.eigenvectors;
    let scaled = Mat8::from_fn(|i, j| v[(i, j)] * roots[j]);
    let s = scaled * v.adjoint();
    Ok((s + s.adjoint()) * Complex64::new(0.5, 0.0))
}
