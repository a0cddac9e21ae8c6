//! Random initial data: a Gaussian field with prescribed covariance symbol and a
//! non-Gaussian finite-range moving average of ±1 noise.
//!
//! Both samplers are linear images `ψ₀ = Kξ` of i.i.d. unit-variance noise `ξ`,
//! so projections `⟨ψ₀, φ⟩ = ⟨ξ, Kᵀφ⟩` can be evaluated without materialising
//! the field. Sample `i` always draws its noise in the same order from the
//! stream [`rng::sample_rng`]`(seed, i)`.

pub mod empirical;
pub mod kernel;
pub mod rng;
pub mod symbol;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fft_forward, fft_inverse, GridSpec, RealField8};
pub use empirical::{empirical_covariance, empirical_mean, CovarianceAccumulator, CovarianceEstimate, MeanEstimate};
pub use kernel::{Kernel, KernelModel};
pub use symbol::{GridSymbol, SymbolModel};

/// Configuration of the initial measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplerSpec {
    GaussianSpectral {
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        symbol: SymbolModel,
    },
    FiniteRangeMovingAverage {
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        kernel: KernelModel,
    },
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec::GaussianSpectral { seed: 0, symbol: SymbolModel::default() }
    }
}

impl SamplerSpec {
    pub fn seed(&self) -> u64 {
        match self {
            SamplerSpec::GaussianSpectral { seed, .. } | SamplerSpec::FiniteRangeMovingAverage { seed, .. } => *seed,
        }
    }

    pub fn with_seed(mut self, new_seed: u64) -> Self {
        match &mut self {
            SamplerSpec::GaussianSpectral { seed, .. } | SamplerSpec::FiniteRangeMovingAverage { seed, .. } => {
                *seed = new_seed
            }
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Gaussian,
    /// Symmetric ±1 entries.
    Rademacher,
}

#[derive(Debug, Clone)]
enum Law {
    Gaussian { symbol: GridSymbol, root: GridSymbol },
    MovingAverage(Kernel),
}

#[derive(Debug, Clone)]
pub struct Sampler {
    grid: GridSpec,
    seed: u64,
    law: Law,
}

impl Sampler {
    pub fn new(spec: &SamplerSpec, grid: GridSpec) -> Result<Self> {
        match spec {
            SamplerSpec::GaussianSpectral { seed, symbol } => Self::gaussian(symbol.on_grid(grid)?, *seed),
            SamplerSpec::FiniteRangeMovingAverage { seed, kernel } => {
                Ok(Self::moving_average(Kernel::new(kernel, grid)?, *seed))
            }
        }
    }

    /// Gaussian field with covariance symbol `q̂₀`; fails unless `q̂₀` is PSD at every mode.
    pub fn gaussian(symbol: GridSymbol, seed: u64) -> Result<Self> {
        let root = symbol.sqrt()?;
        Ok(Self { grid: *symbol.grid(), seed, law: Law::Gaussian { symbol, root } })
    }

    pub fn moving_average(kernel: Kernel, seed: u64) -> Self {
        let grid = *kernel.grid();
        Self { grid, seed, law: Law::MovingAverage(kernel) }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn noise_kind(&self) -> NoiseKind {
        match self.law {
            Law::Gaussian { .. } => NoiseKind::Gaussian,
            Law::MovingAverage(_) => NoiseKind::Rademacher,
        }
    }

    /// The i.i.d. noise `ξ` behind sample `index`.
    pub fn noise(&self, index: u64) -> RealField8 {
        let mut rng = rng::sample_rng(self.seed, index);
        let mut out = RealField8::zeros(self.grid);
        for j in 0..8 {
            let c = out.component_mut(j);
            match self.noise_kind() {
                NoiseKind::Gaussian => c.iter_mut().for_each(|v| *v = rng.sample(StandardNormal)),
                NoiseKind::Rademacher => {
                    for chunk in c.chunks_mut(64) {
                        let bits = rng.next_u64();
                        for (b, v) in chunk.iter_mut().enumerate() {
                            *v = if (bits >> b) & 1 == 1 { 1.0 } else { -1.0 };
                        }
                    }
                }
            }
        }
        out
    }

    /// `Kξ`.
    pub fn apply(&self, noise: &RealField8) -> Result<RealField8> {
        self.grid.ensure_same(noise.grid())?;
        Ok(match &self.law {
            Law::Gaussian { root, .. } => self.spectral_multiply(root, noise),
            Law::MovingAverage(kernel) => kernel.apply(noise),
        })
    }

    pub fn sample(&self, index: u64) -> RealField8 {
        self.apply(&self.noise(index)).expect("noise lives on the sampler grid")
    }

    /// `Kᵀφ`, so that `⟨Kξ, φ⟩ = ⟨ξ, Kᵀφ⟩`.
    pub fn pullback(&self, phi: &RealField8) -> Result<RealField8> {
        self.grid.ensure_same(phi.grid())?;
        Ok(match &self.law {
            // the Hermitian root with q̂(−k) = conj q̂(k) gives a symmetric operator
            Law::Gaussian { root, .. } => self.spectral_multiply(root, phi),
            Law::MovingAverage(kernel) => kernel.transpose_apply(phi),
        })
    }

    fn spectral_multiply(&self, root: &GridSymbol, field: &RealField8) -> RealField8 {
        let scale = self.grid.cell_volume().powf(-0.5);
        let mut spec = fft_forward(field);
        for idx in 0..self.grid.len() {
            let v = root.apply(idx, &spec.mode(idx)) * num_complex::Complex64::new(scale, 0.0);
            spec.set_mode(idx, &v);
        }
        fft_inverse(&spec)
    }

    /// `⟨ψ₀, φᵢ⟩` for sample `index`, given pulled-back weights `Kᵀφᵢ`.
    /// Streams the noise; the field itself is never formed.
    pub fn project(&self, index: u64, pulled: &[RealField8]) -> Vec<f64> {
        let mut rng = rng::sample_rng(self.seed, index);
        let mut acc = vec![0.0; pulled.len()];
        for j in 0..8 {
            let comps: Vec<&[f64]> = pulled.iter().map(|p| p.component(j)).collect();
            match self.noise_kind() {
                NoiseKind::Gaussian => {
                    for idx in 0..self.grid.len() {
                        let z: f64 = rng.sample(StandardNormal);
                        for (a, c) in acc.iter_mut().zip(&comps) {
                            *a += z * c[idx];
                        }
                    }
                }
                NoiseKind::Rademacher => {
                    for start in (0..self.grid.len()).step_by(64) {
                        let bits = rng.next_u64();
                        for (a, c) in acc.iter_mut().zip(&comps) {
                            let mut s = 0.0;
                            for (b, w) in c[start..start + 64].iter().enumerate() {
                                let flip = (!(bits >> b) & 1) << 63;
                                s += f64::from_bits(w.to_bits() ^ flip);
                            }
                            *a += s;
                        }
                    }
                }
            }
        }
        let h3 = self.grid.cell_volume();
        acc.iter().map(|a| a * h3).collect()
    }

    /// The exact covariance symbol `q̂₀` of the sampled measure.
    pub fn exact_covariance(&self) -> GridSymbol {
        match &self.law {
            Law::Gaussian { symbol, .. } => symbol.clone(),
            Law::MovingAverage(kernel) => kernel.covariance_symbol(),
        }
    }

    /// Distance beyond which field values are uncorrelated (independent for
    /// the moving average).
    pub fn correlation_range(&self) -> f64 {
        match &self.law {
            Law::Gaussian { symbol, .. } => symbol.correlation_range(),
            Law::MovingAverage(kernel) => kernel.correlation_range(),
        }
    }

    /// `e₀ = E|ψ₀(x)|²`.
    pub fn mean_charge_density(&self) -> f64 {
        self.exact_covariance().trace_integral()
    }

    pub fn kernel(&self) -> Option<&Kernel> {
        match &self.law {
            Law::MovingAverage(k) => Some(k),
            Law::Gaussian { .. } => None,
        }
    }
}

/// Rejects sample counts below `required`.
pub fn require_samples(required: usize, got: usize) -> Result<()> {
    if got < required {
        Err(Error::InsufficientSamples { required, got })
    } else {
        Ok(())
    }
}
