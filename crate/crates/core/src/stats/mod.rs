//! Monte Carlo statistics of projections `⟨U(t)ψ₀, φ⟩`: moments and cumulants,
//! characteristic functionals, the room–corridor split and dispersive decay.

pub mod decay;
pub mod ensemble;
pub mod rooms;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

pub use decay::{decay_probe, DecayReport};
pub use ensemble::{char_functional, cumulant_report, run_ensemble, CharEstimate, CumulantReport, EnsembleResult};
pub use rooms::{room_corridor_decompose, variance_scaling_report, Decomposition, RoomCorridorLayout, VarianceScaling};

/// Compensated (Neumaier) sum.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Sample mean, variance and standardised third and fourth central moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased variance.
    pub variance: f64,
    /// `m₃ / m₂^{3/2}` with population central moments.
    pub skewness: f64,
    /// `m₄ / m₂² − 3`.
    pub excess_kurtosis: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = neumaier_sum(values.iter().cloned()) / n;
        let m2 = neumaier_sum(values.iter().map(|v| (v - mean).powi(2))) / n;
        let m3 = neumaier_sum(values.iter().map(|v| (v - mean).powi(3))) / n;
        let m4 = neumaier_sum(values.iter().map(|v| (v - mean).powi(4))) / n;
        let variance = if values.len() > 1 { m2 * n / (n - 1.0) } else { 0.0 };
        let (skewness, excess_kurtosis) = if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0) } else { (0.0, 0.0) };
        Self { count: values.len(), mean, variance, skewness, excess_kurtosis }
    }

    /// Standard error of the mean.
    pub fn mean_standard_error(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }
}

/// Two-sided normal p-value of a z-score.
pub fn two_sided_p(z: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * normal.sf(z.abs())
}

/// One-sample Kolmogorov–Smirnov test against `N(0, variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_normal(values: &[f64], variance: f64) -> KsTest {
    let normal = Normal::new(0.0, variance.sqrt()).expect("positive variance");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = normal.cdf(*x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * statistic;
    KsTest { statistic, p_value: kolmogorov_sf(lambda) }
}

/// `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²}`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
