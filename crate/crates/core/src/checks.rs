//! Pass/fail invariant suites: the algebra of the symbols, the propagator on a
//! grid, and the fixed-point structure of the covariance dynamics.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clifford::{build_dirac_matrices, max_abs, max_abs_real, Mat4, Mat8, RealMat8, RealSymbols, WaveVector};
use crate::covariance::{q_hat_inf, q_hat_t, time_average_q_hat};
use crate::error::Result;
use crate::grid::{complexify, inner, local_seminorm, realify, RealField8, TestFunction};
use crate::measures::SymbolModel;
use crate::propagator::{charge_defect, support_radius, Propagator};

/// One named measurement with optional bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, upper: f64) -> Self {
        Self::within(name, value, None, Some(upper))
    }

    pub fn at_least(name: impl Into<String>, value: f64, lower: f64) -> Self {
        Self::within(name, value, Some(lower), None)
    }

    pub fn within(name: impl Into<String>, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = !value.is_nan() && lower.is_none_or(|l| value >= l) && upper.is_none_or(|u| value <= u);
        Self { name: name.into(), value, lower, upper, passed }
    }

    /// A boolean property, recorded as 1 (holds) or 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Uniform wave vectors in `[−a, a]³`.
pub fn random_wave_vectors(count: usize, half_width: f64, seed: u64) -> Vec<WaveVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            WaveVector::new(
                rng.random_range(-half_width..half_width),
                rng.random_range(-half_width..half_width),
                rng.random_range(-half_width..half_width),
            )
        })
        .collect()
}

fn anticommutator4(a: &Mat4, b: &Mat4) -> Mat4 {
    a * b + b * a
}

/// Clifford relations of `α, β` and `Λ, Λ₀`, and the identities
/// `P(−ik)² = −ω²I`, `P(−ik)Pᵀ(ik) = (k² + m²)I` over random `k`.
pub fn algebra_checks(mass: f64, k_count: usize, seed: u64) -> Result<Vec<Check>> {
    let d = build_dirac_matrices();
    let id4 = Mat4::identity();
    let mut dirac = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { id4 * Complex64::new(2.0, 0.0) } else { Mat4::zeros() };
            dirac = dirac.max((anticommutator4(&d.alpha[i], &d.alpha[j]) - expected).camax());
        }
        dirac = dirac.max(anticommutator4(&d.alpha[i], &d.beta).camax());
        dirac = dirac.max((d.alpha[i].adjoint() - d.alpha[i]).camax());
    }
    dirac = dirac.max((d.beta * d.beta - id4).camax());

    let s = RealSymbols::new(mass)?;
    let id8 = RealMat8::identity();
    let mut lambda = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { id8 * 2.0 } else { RealMat8::zeros() };
            lambda = lambda.max(max_abs_real(&(s.lambda[i] * s.lambda[j] + s.lambda[j] * s.lambda[i] - expected)));
        }
        lambda = lambda.max(max_abs_real(&(s.lambda[i] * s.lambda0 + s.lambda0 * s.lambda[i])));
        lambda = lambda.max(max_abs_real(&(s.lambda[i].transpose() - s.lambda[i])));
    }
    lambda = lambda.max(max_abs_real(&(s.lambda0 * s.lambda0 + id8)));
    lambda = lambda.max(max_abs_real(&(s.lambda0.transpose() + s.lambda0)));

    let mut square = 0.0_f64;
    let mut product = 0.0_f64;
    for k in random_wave_vectors(k_count, 4.0, seed) {
        let p = s.symbol_p(&k);
        let w2 = Complex64::new(k.norm_squared() + mass * mass, 0.0);
        square = square.max(max_abs(&(p * p + Mat8::identity() * w2)));
        let p_plus = s.symbol_p(&(-k)).transpose();
        product = product.max(max_abs(&(p * p_plus - Mat8::identity() * w2)));
    }
    Ok(vec![
        Check::at_most("dirac matrix relations", dirac, 1e-14),
        Check::at_most("real symbol relations", lambda, 1e-14),
        Check::at_most("P squared equals -omega^2", square, 1e-12),
        Check::at_most("P times transpose equals k^2 + m^2", product, 1e-12),
    ])
}

/// Parameters of [`propagator_checks`].
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorCheckSetup {
    pub times: Vec<f64>,
    pub k_count: usize,
    pub seed: u64,
    /// Width and amplitude floor of the Gaussian used for the cone test.
    pub cone_sigma: f64,
    pub cone_floor: f64,
    pub cone_times: Vec<f64>,
    pub local_radius: f64,
}

/// Unitarity, group law, time reversal, charge conservation, duality, agreement
/// of the complex and real routes, finite propagation speed and the local
/// charge estimate, for initial data `psi` and test field `phi`.
pub fn propagator_checks(
    propagator: &Propagator,
    psi: &RealField8,
    phi: &RealField8,
    setup: &PropagatorCheckSetup,
) -> Result<Vec<Check>> {
    let grid = *propagator.grid();
    let symbols = propagator.symbols();
    let mut unitarity = 0.0_f64;
    for k in random_wave_vectors(setup.k_count, std::f64::consts::PI, setup.seed) {
        for &t in &setup.times {
            let g = symbols.propagator(&k, t);
            unitarity = unitarity.max(max_abs(&(g * g.adjoint() - Mat8::identity())));
        }
    }
    let scale = psi.max_norm();
    let norm = (psi.charge() * phi.charge()).sqrt();
    let (mut charge, mut group, mut reversal, mut duality, mut complex) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for (i, &t) in setup.times.iter().enumerate() {
        let evolved = propagator.evolve_real(psi, t)?;
        charge = charge.max(charge_defect(psi, &evolved));
        let back = propagator.evolve_real(&evolved, -t)?;
        reversal = reversal.max(back.max_abs_diff(psi) / scale);
        let s = setup.times[(i + 1) % setup.times.len()];
        let composed = propagator.evolve_real(&evolved, s)?;
        group = group.max(composed.max_abs_diff(&propagator.evolve_real(psi, s + t)?) / scale);
        let lhs = inner(&evolved, phi)?;
        let rhs = inner(psi, &propagator.adjoint_evolve_field(phi, t)?)?;
        duality = duality.max((lhs - rhs).abs() / norm);
        let via_complex = realify(&propagator.evolve_complex4(&complexify(psi), t)?);
        complex = complex.max(via_complex.max_abs_diff(&evolved) / scale);
    }

    let h = grid.spacing();
    let w = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let gauss = TestFunction::truncated_gaussian(grid, setup.cone_sigma, setup.cone_floor, w);
    let r0 = support_radius(gauss.field(), setup.cone_floor);
    let mut cone = f64::NEG_INFINITY;
    for &t in &setup.cone_times {
        let r = support_radius(&propagator.evolve_real(gauss.field(), t)?, setup.cone_floor);
        cone = cone.max(r - r0 - t.abs());
    }

    let mut local = 0.0_f64;
    for &t in &setup.times {
        if setup.local_radius + t.abs() < grid.half_period() {
            local = local.max(propagator.local_estimate_check(psi, t, setup.local_radius)?.ratio);
        }
    }
    // validates the radius even when every time is too large to test
    local_seminorm(psi, setup.local_radius)?;

    Ok(vec![
        Check::at_most("symbol unitarity", unitarity, 1e-12),
        Check::at_most("charge conservation", charge, 1e-10),
        Check::at_most("group law", group, 1e-10),
        Check::at_most("time reversal", reversal, 1e-10),
        Check::at_most("duality", duality, 1e-10),
        Check::at_most("complex and real routes agree", complex, 1e-10),
        Check::at_most("cone growth beyond r0 + |t|", cone, h),
        Check::at_most("local charge estimate ratio", local, 1.0 + 1e-9),
    ])
}

/// Random positive semidefinite Hermitian 8×8 matrix satisfying no symmetry.
fn random_psd(rng: &mut ChaCha8Rng) -> Mat8 {
    let b = Mat8::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    b * b.adjoint()
}

/// Parameters of [`fixed_point_checks`].
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSetup {
    pub mass: f64,
    pub times: Vec<f64>,
    pub k_count: usize,
    pub seed: u64,
    /// Horizons `T, 2T, 4T, …` for the time average.
    pub horizons: Vec<f64>,
    pub average_k_count: usize,
    pub panel: f64,
    pub ratio_range: (f64, f64),
}

/// RMS over `ks` of `‖(1/T)∫₀ᵀ q̂_t dt − q̂_∞‖_F` for the given `q̂₀` model.
pub fn time_average_errors(
    symbols: &RealSymbols,
    model: &SymbolModel,
    ks: &[WaveVector],
    horizons: &[f64],
    panel: f64,
) -> Vec<f64> {
    let mut sums = vec![0.0; horizons.len()];
    for k in ks {
        let q0 = model.eval(k);
        let inf = q_hat_inf(symbols, k, &q0);
        for (s, avg) in sums.iter_mut().zip(time_average_q_hat(symbols, k, &q0, horizons, panel)) {
            *s += (avg - inf).norm_squared();
        }
    }
    sums.iter().map(|s| (s / ks.len() as f64).sqrt()).collect()
}

/// `q̂_∞` is invariant, equals `I` for `q̂₀ = I`, and the time average of `q̂_t`
/// approaches it like `1/T`.
pub fn fixed_point_checks(setup: &FixedPointSetup) -> Result<(Vec<Check>, Vec<f64>)> {
    let s = RealSymbols::new(setup.mass)?;
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    let mut invariance = 0.0_f64;
    let mut identity = 0.0_f64;
    for k in random_wave_vectors(setup.k_count, std::f64::consts::PI, setup.seed) {
        let inf = q_hat_inf(&s, &k, &random_psd(&mut rng));
        for &t in &setup.times {
            invariance = invariance.max(max_abs(&(q_hat_t(&s, &k, t, &inf) - inf)));
        }
        identity = identity.max(max_abs(&(q_hat_inf(&s, &k, &Mat8::identity()) - Mat8::identity())));
    }
    let model = SymbolModel::real_part_bump(1.0, 1.0);
    let ks = random_wave_vectors(setup.average_k_count, std::f64::consts::PI, setup.seed.wrapping_add(1));
    let errors = time_average_errors(&s, &model, &ks, &setup.horizons, setup.panel);
    let mut checks = vec![
        Check::at_most("equilibrium symbol is invariant", invariance, 1e-11),
        Check::at_most("identity is its own equilibrium", identity, 1e-12),
    ];
    let (lo, hi) = setup.ratio_range;
    for (i, w) in errors.windows(2).enumerate() {
        let name = format!("time-average error ratio T = {} to {}", setup.horizons[i], setup.horizons[i + 1]);
        checks.push(Check::within(name, w[0] / w[1], Some(lo), Some(hi)));
    }
    Ok((checks, errors))
}
