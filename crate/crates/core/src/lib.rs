//! Spectral simulation of the free Dirac equation on a periodic grid, with
//! random translation-invariant initial data and the statistical tooling to
//! watch the evolved measure approach a Gaussian equilibrium.
//!
//! - [`clifford`]: Dirac matrices, their real 8×8 form and the Fourier symbols.
//! - [`grid`]: grids, real and complex fields, FFTs, test functions, field dumps.
//! - [`propagator`]: the evolution group `U(t)` and its adjoint `U′(t)`.
//! - [`measures`]: Gaussian and moving-average samplers and empirical covariance.
//! - [`covariance`]: exact `q̂_t`, `q̂_∞`, position tables and quadratic forms.
//! - [`stats`]: ensembles, cumulants, characteristic functionals, room–corridor
//!   diagnostics and dispersive decay.
//! - [`checks`]: named pass/fail invariant suites.
//! - [`cli`]: the experiment runner used by the `dirac-eq` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod cli;
pub mod clifford;
pub mod covariance;
pub mod error;
pub mod grid;
pub mod measures;
pub mod propagator;
pub mod stats;

pub use clifford::{DiracMatrices, RealSymbols, WaveVector};
pub use error::{Error, Result};
pub use grid::{GridSpec, RealField8, SpinorField, TestFunction};
pub use measures::{Sampler, SamplerSpec};
pub use propagator::Propagator;
