//! Ensembles of projections `⟨U(t)ψ₀, φ⟩`.
//!
//! Each projection is computed as `⟨ξ, Kᵀ U′(t)φ⟩`: the adjoint evolution and
//! the sampler transpose are applied once per `(t, φ)`, and every sample only
//! streams its noise against the resulting weights.

use rayon::prelude::*;
use serde::Serialize;

use super::{ks_normal, neumaier_sum, two_sided_p, KsTest, Moments};
use crate::error::{Error, Result};
use crate::grid::{inner, RealField8, TestFunction};
use crate::measures::{require_samples, Sampler};
use crate::propagator::Propagator;

/// Projections for every sample, time and test function.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    times: Vec<f64>,
    tests: usize,
    samples: usize,
    /// Row-major `[sample][time][test]`.
    values: Vec<f64>,
}

impl EnsembleResult {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn test_count(&self) -> usize {
        self.tests
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn value(&self, sample: usize, time: usize, test: usize) -> f64 {
        self.values[(sample * self.times.len() + time) * self.tests + test]
    }

    /// All samples of `⟨U(t)ψ₀, φ⟩` for one time and test function, in sample order.
    pub fn projections(&self, time: usize, test: usize) -> Vec<f64> {
        (0..self.samples).map(|s| self.value(s, time, test)).collect()
    }

    pub fn moments(&self, time: usize, test: usize) -> Moments {
        Moments::of(&self.projections(time, test))
    }
}

/// Largest `|t| + r_φ + r_corr` over the requested pairs, which must stay
/// below `L/2` so that no projection sees the periodic images.
pub fn wraparound_requirement(sampler: &Sampler, tests: &[TestFunction], times: &[f64]) -> f64 {
    let r_phi = tests.iter().map(TestFunction::radius).fold(0.0, f64::max);
    let t_max = times.iter().map(|t| t.abs()).fold(0.0, f64::max);
    t_max + r_phi + sampler.correlation_range()
}

/// Samples `0..samples` of the sampler's stream, projected at every `(t, φ)`.
pub fn run_ensemble(
    propagator: &Propagator,
    sampler: &Sampler,
    tests: &[TestFunction],
    times: &[f64],
    samples: usize,
) -> Result<EnsembleResult> {
    require_samples(1, samples)?;
    if tests.is_empty() || times.is_empty() {
        return Err(Error::InvalidArgument("an ensemble needs at least one time and one test function".into()));
    }
    let grid = propagator.grid();
    grid.ensure_same(sampler.grid())?;
    for phi in tests {
        grid.ensure_same(phi.grid())?;
    }
    let required = wraparound_requirement(sampler, tests, times);
    if required >= grid.half_period() {
        return Err(Error::WraparoundBudget { required, limit: grid.half_period() });
    }
    let pairs: Vec<(f64, &TestFunction)> = times.iter().flat_map(|&t| tests.iter().map(move |p| (t, p))).collect();
    let weights = pairs
        .par_iter()
        .map(|(t, phi)| sampler.pullback(&propagator.adjoint_evolve(phi, *t)?))
        .collect::<Result<Vec<RealField8>>>()?;
    let rows: Vec<Vec<f64>> = (0..samples as u64).into_par_iter().map(|s| sampler.project(s, &weights)).collect();
    Ok(EnsembleResult { times: times.to_vec(), tests: tests.len(), samples, values: rows.concat() })
}

/// Recomputes the listed samples by building `ψ₀`, evolving it forward and
/// pairing with `φ`. Returns the largest disagreement with the ensemble,
/// relative to `max(|value|, standard deviation of its column)`.
pub fn forward_route_defect(
    propagator: &Propagator,
    sampler: &Sampler,
    tests: &[TestFunction],
    result: &EnsembleResult,
    sample_indices: &[usize],
) -> Result<f64> {
    let scales: Vec<f64> = (0..result.times.len())
        .flat_map(|ti| (0..result.tests).map(move |fi| (ti, fi)))
        .map(|(ti, fi)| result.moments(ti, fi).variance.sqrt())
        .collect();
    let mut worst = 0.0_f64;
    for &s in sample_indices {
        if s >= result.samples {
            return Err(Error::InvalidArgument(format!("sample {s} is outside the ensemble of {}", result.samples)));
        }
        let psi0 = sampler.sample(s as u64);
        for (ti, &t) in result.times.iter().enumerate() {
            let evolved = propagator.evolve_real(&psi0, t)?;
            for (fi, phi) in tests.iter().enumerate() {
                let forward = inner(&evolved, phi.field())?;
                let stored = result.value(s, ti, fi);
                let scale = forward.abs().max(stored.abs()).max(scales[ti * result.tests + fi]);
                if scale > 0.0 {
                    worst = worst.max((forward - stored).abs() / scale);
                }
            }
        }
    }
    Ok(worst)
}

/// Sample skewness and excess kurtosis against their Gaussian null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CumulantReport {
    pub moments: Moments,
    /// `√(6/M)`
    pub skewness_se: f64,
    /// `√(24/M)`
    pub kurtosis_se: f64,
    pub skewness_z: f64,
    pub kurtosis_z: f64,
    pub skewness_p: f64,
    pub kurtosis_p: f64,
    /// Kolmogorov–Smirnov test against `N(0, reference_variance)`.
    pub ks: KsTest,
    pub reference_variance: f64,
}

pub const MIN_CUMULANT_SAMPLES: usize = 1000;

pub fn cumulant_report(values: &[f64], reference_variance: f64) -> Result<CumulantReport> {
    require_samples(MIN_CUMULANT_SAMPLES, values.len())?;
    if !(reference_variance > 0.0) {
        return Err(Error::InvalidArgument(format!("reference variance must be positive, got {reference_variance}")));
    }
    let moments = Moments::of(values);
    let m = values.len() as f64;
    let skewness_se = (6.0 / m).sqrt();
    let kurtosis_se = (24.0 / m).sqrt();
    let skewness_z = moments.skewness / skewness_se;
    let kurtosis_z = moments.excess_kurtosis / kurtosis_se;
    Ok(CumulantReport {
        moments,
        skewness_se,
        kurtosis_se,
        skewness_z,
        kurtosis_z,
        skewness_p: two_sided_p(skewness_z),
        kurtosis_p: two_sided_p(kurtosis_z),
        ks: ks_normal(values, reference_variance),
        reference_variance,
    })
}

/// Empirical `E e^{iλX}` with its jackknife standard error, next to the
/// Gaussian value `exp(−½λ²Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharEstimate {
    pub lambda: f64,
    pub re: f64,
    pub im: f64,
    pub standard_error: f64,
    pub gaussian: f64,
}

impl CharEstimate {
    /// `|estimate − gaussian|` in units of the standard error.
    pub fn deviation_in_se(&self) -> f64 {
        let d = ((self.re - self.gaussian).powi(2) + self.im.powi(2)).sqrt();
        d / self.standard_error
    }
}

pub fn char_functional(values: &[f64], lambdas: &[f64], gaussian_variance: f64) -> Result<Vec<CharEstimate>> {
    require_samples(2, values.len())?;
    let m = values.len() as f64;
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let (c, s): (Vec<f64>, Vec<f64>) = values.iter().map(|x| ((lambda * x).cos(), (lambda * x).sin())).unzip();
            let (sc, ss) = (neumaier_sum(c.iter().cloned()), neumaier_sum(s.iter().cloned()));
            let (re, im) = (sc / m, ss / m);
            // leave-one-out means θ₍ᵢ₎ = (S − zᵢ)/(M − 1), centred on their mean S/M
            let spread = neumaier_sum(c.iter().zip(&s).map(|(ci, si)| {
                let dr = (sc - ci) / (m - 1.0) - re;
                let di = (ss - si) / (m - 1.0) - im;
                dr * dr + di * di
            }));
            CharEstimate {
                lambda,
                re,
                im,
                standard_error: ((m - 1.0) / m * spread).sqrt(),
                gaussian: (-0.5 * lambda * lambda * gaussian_variance).exp(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::quadratic_form_t;
    use crate::grid::GridSpec;
    use crate::measures::{Kernel, KernelModel, SymbolModel};

    fn setup() -> (Propagator, Sampler, Vec<TestFunction>) {
        let g = GridSpec::new(16, 16.0).unwrap();
        let p = Propagator::new(1.0, g).unwrap();
        let k = Kernel::new(&KernelModel::Bump { radius: 1.5 }, g).unwrap();
        let s = Sampler::moving_average(k, 11);
        let tests = vec![
            TestFunction::bump(g, 2.0, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            TestFunction::bump(g, 1.5, [0.0, 0.5, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
        ];
        (p, s, tests)
    }

    #[test]
    fn adjoint_route_matches_forward_route() {
        let (p, s, tests) = setup();
        let r = run_ensemble(&p, &s, &tests, &[0.0, 1.5, 2.75], 6).unwrap();
        assert_eq!(r.samples(), 6);
        assert!(forward_route_defect(&p, &s, &tests, &r, &[0, 3, 5]).unwrap() < 1e-10);
        assert!(forward_route_defect(&p, &s, &tests, &r, &[6]).is_err());
    }

    #[test]
    fn ensemble_is_deterministic_and_single_sample_allowed() {
        let (p, s, tests) = setup();
        let a = run_ensemble(&p, &s, &tests, &[1.0], 1).unwrap();
        let b = run_ensemble(&p, &s, &tests, &[1.0], 3).unwrap();
        assert_eq!(a.value(0, 0, 1), b.value(0, 0, 1));
        assert!(matches!(run_ensemble(&p, &s, &tests, &[1.0], 0), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn budget_is_enforced() {
        let (p, s, tests) = setup();
        // 4 + 2 + 2·√2 > 8
        assert!(matches!(run_ensemble(&p, &s, &tests, &[4.0], 2), Err(Error::WraparoundBudget { .. })));
    }

    #[test]
    fn gaussian_ensemble_variance_matches_quadratic_form() {
        let g = GridSpec::new(16, 16.0).unwrap();
        let p = Propagator::new(1.0, g).unwrap();
        let model = SymbolModel::GaussianBump { kappa: 2.0, amplitude: 1.0, weights: [1.0; 8] };
        let sym = model.on_grid(g).unwrap();
        let s = Sampler::gaussian(sym.clone(), 5).unwrap();
        let phi = TestFunction::bump(g, 2.0, [1.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let t = 2.0;
        let r = run_ensemble(&p, &s, std::slice::from_ref(&phi), &[t], 4000).unwrap();
        let exact = quadratic_form_t(phi.field(), p.symbols(), &sym, t).unwrap();
        let m = r.moments(0, 0);
        // variance of a Gaussian variance estimate: 2σ⁴/(M−1)
        let se = exact * (2.0 / 3999.0_f64).sqrt();
        assert!((m.variance - exact).abs() < 5.0 * se, "{} vs {}", m.variance, exact);
        assert!(m.mean.abs() < 5.0 * (exact / 4000.0).sqrt());
        let cf = char_functional(&r.projections(0, 0), &[1.0 / exact.sqrt()], exact).unwrap();
        assert!(cf[0].deviation_in_se() < 5.0);
        let rep = cumulant_report(&r.projections(0, 0), exact).unwrap();
        assert!(rep.skewness_z.abs() < 5.0 && rep.kurtosis_z.abs() < 5.0);
        assert!(rep.ks.p_value > 1e-4);
    }

    #[test]
    fn jackknife_of_a_mean_is_the_usual_standard_error() {
        let xs = [0.1, -0.4, 0.9, 1.3, -2.0, 0.05];
        let cf = char_functional(&xs, &[0.7], 1.0).unwrap()[0];
        let zs: Vec<(f64, f64)> = xs.iter().map(|x| ((0.7 * x).cos(), (0.7 * x).sin())).collect();
        let m = xs.len() as f64;
        let ss: f64 = zs.iter().map(|(c, s)| (c - cf.re).powi(2) + (s - cf.im).powi(2)).sum();
        assert!((cf.standard_error - (ss / (m * (m - 1.0))).sqrt()).abs() < 1e-14);
        assert!((cf.gaussian - (-0.245_f64).exp()).abs() < 1e-15);
        assert!(cumulant_report(&xs, 1.0).is_err());
    }
}
