//! TOML experiment configuration. Every section is optional; unknown keys are
//! rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, TestFunction};
use crate::measures::{KernelModel, SamplerSpec, SymbolModel};
use crate::stats::rooms::DEFAULT_DELTA;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mass: f64,
    pub grid: GridConfig,
    pub sampler: SamplerSpec,
    pub verify: VerifyConfig,
    pub covariance: CovarianceConfig,
    pub ensemble: EnsembleConfig,
    pub rooms: RoomsConfig,
    pub decay: DecayConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            grid: GridConfig::default(),
            sampler: SamplerSpec::FiniteRangeMovingAverage { seed: 0, kernel: KernelModel::Bump { radius: 1.5 } },
            verify: VerifyConfig::default(),
            covariance: CovarianceConfig::default(),
            ensemble: EnsembleConfig::default(),
            rooms: RoomsConfig::default(),
            decay: DecayConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.n, self.grid.length)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 64, length: 64.0 }
    }
}

fn e1() -> [f64; 8] {
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
}

/// A test function centred at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunctionSpec {
    /// `exp(1 − 1/(1 − r²/r̄²))` inside `r < r̄`.
    Bump {
        radius: f64,
        #[serde(default = "e1")]
        weights: [f64; 8],
    },
    /// `exp(−r²/2σ²)`, cut where it drops below `floor`.
    Gaussian {
        sigma: f64,
        #[serde(default = "default_floor")]
        floor: f64,
        #[serde(default = "e1")]
        weights: [f64; 8],
    },
    Point {
        #[serde(default = "e1")]
        weights: [f64; 8],
    },
}

fn default_floor() -> f64 {
    1e-12
}

impl TestFunctionSpec {
    pub fn bump(radius: f64) -> Self {
        TestFunctionSpec::Bump { radius, weights: e1() }
    }

    pub fn build(&self, grid: GridSpec) -> Result<TestFunction> {
        let bad = |what: &str, v: f64| Err(Error::Config(format!("test function {what} must be positive, got {v}")));
        match *self {
            TestFunctionSpec::Bump { radius, weights } => {
                if !(radius > 0.0) {
                    return bad("radius", radius);
                }
                Ok(TestFunction::bump(grid, radius, weights))
            }
            TestFunctionSpec::Gaussian { sigma, floor, weights } => {
                if !(sigma > 0.0) {
                    return bad("sigma", sigma);
                }
                if !(floor > 0.0 && floor < 1.0) {
                    return Err(Error::Config(format!("gaussian floor must lie in (0, 1), got {floor}")));
                }
                Ok(TestFunction::truncated_gaussian(grid, sigma, floor, weights))
            }
            TestFunctionSpec::Point { weights } => Ok(TestFunction::point(grid, weights)),
        }
    }
}

/// `start, start + step, …` up to and including `end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl TimeRange {
    pub fn times(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.end >= self.start) {
            return Err(Error::Config(format!("time range needs step > 0 and end >= start, got {self:?}")));
        }
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Random wave vectors per symbol identity.
    pub random_k: usize,
    pub times: Vec<f64>,
    pub phi: TestFunctionSpec,
    pub cone_sigma: f64,
    pub cone_floor: f64,
    pub cone_times: Vec<f64>,
    /// Ball radius `R` of the local charge estimate.
    pub local_radius: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            random_k: 1000,
            times: vec![0.5, 3.7, 17.3],
            phi: TestFunctionSpec::Bump { radius: 3.0, weights: [1.0, 0.0, 0.5, 0.0, 0.0, -0.5, 0.0, 1.0] },
            cone_sigma: 2.0,
            cone_floor: 1e-9,
            cone_times: vec![2.0, 4.0, 8.0],
            local_radius: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CovarianceConfig {
    /// Initial covariance symbol whose convergence is tabulated.
    pub symbol: SymbolModel,
    pub probes: Vec<[i64; 3]>,
    pub times: TimeRange,
    pub envelope_start: f64,
    pub drop_from: f64,
    pub drop_to: f64,
    pub min_drop: f64,
    pub max_slope: f64,
    pub fixed_point_times: Vec<f64>,
    pub random_k: usize,
    pub horizons: Vec<f64>,
    pub average_k: usize,
    pub panel: f64,
    pub ratio_range: [f64; 2],
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        Self {
            symbol: SymbolModel::real_part_bump(1.0, 1.0),
            probes: vec![[0, 0, 0], [1, 0, 0], [0, 2, 1], [3, 0, 0], [2, 2, 2]],
            times: TimeRange { start: 1.0, end: 32.0, step: 0.25 },
            envelope_start: 1.0,
            drop_from: 2.0,
            drop_to: 20.0,
            min_drop: 10.0,
            max_slope: -1.2,
            fixed_point_times: vec![1.0, 10.0, 100.0],
            random_k: 1000,
            horizons: vec![25.0, 50.0, 100.0],
            average_k: 4096,
            panel: 0.25,
            ratio_range: [1.6, 2.4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub samples: usize,
    pub times: Vec<f64>,
    pub tests: Vec<TestFunctionSpec>,
    pub lambdas: Vec<f64>,
    pub spot_checks: usize,
    pub mean_se: f64,
    pub variance_se: f64,
    pub cumulant_se: f64,
    /// Minimum `|excess kurtosis| / SE` required at `t = 0`; 0 disables the check.
    pub initial_kurtosis_se: f64,
    pub char_se: f64,
    pub save_projections: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            times: vec![0.0, 24.0],
            tests: vec![TestFunctionSpec::bump(1.5)],
            lambdas: vec![0.5, 1.0, 2.0],
            spot_checks: 10,
            mean_se: 4.0,
            variance_se: 5.0,
            cumulant_se: 4.0,
            initial_kurtosis_se: 6.0,
            char_se: 3.0,
            save_projections: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoomsConfig {
    pub samples: usize,
    pub times: Vec<f64>,
    pub delta: f64,
    pub phi: TestFunctionSpec,
    pub max_spread: f64,
    /// Samples whose room–corridor sums are compared with the projection.
    pub reconstruction_samples: usize,
}

impl Default for RoomsConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            times: vec![4.0, 8.0, 16.0, 24.0],
            delta: DEFAULT_DELTA,
            phi: TestFunctionSpec::bump(1.5),
            max_spread: 4.0,
            reconstruction_samples: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    pub times: Vec<f64>,
    pub masses: Vec<f64>,
    pub phi: TestFunctionSpec,
    pub expected_exponent: f64,
    pub tolerance: f64,
    /// Largest allowed spread of the exponent across masses.
    pub stability: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            times: vec![8.0, 12.0, 16.0, 20.0, 24.0, 32.0, 40.0, 48.0],
            masses: vec![1.0, 2.0],
            phi: TestFunctionSpec::bump(4.0),
            expected_exponent: -1.5,
            tolerance: 0.15,
            stability: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub dump_fields: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), dump_fields: false }
    }
}
