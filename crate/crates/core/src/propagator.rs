//! Exact spectral evolution under the free Dirac group `U(t)` and its adjoint `U′(t)`.
//!
//! Each Fourier mode of `ℛψ` is multiplied by the 8×8 symbol `Ĝ_t(k)` (or its
//! adjoint), so there is no time stepping. The dynamics use the wave vector with
//! Nyquist components set to zero, which keeps real fields real.

use crate::clifford::{DiracMatrices, Mat8, RealSymbols, Vec4};
use crate::error::{Error, Result};
use crate::grid::{
    complexify, fft_forward, fft_inverse, local_seminorm, realify, spinor_fft_forward, spinor_fft_inverse, GridSpec,
    NodeField, RealField8, SpectralField, SpinorField, TestFunction,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Adjoint,
}

#[derive(Debug, Clone)]
pub struct Propagator {
    symbols: RealSymbols,
    grid: GridSpec,
}

/// An evolved field together with the no-wraparound verdict for it.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub field: RealField8,
    /// `|t| + r̄ + r_corr ≥ L/2`: the torus may differ from ℝ³ near the boundary.
    pub wraparound: bool,
}

impl Propagator {
    pub fn new(mass: f64, grid: GridSpec) -> Result<Self> {
        Ok(Self { symbols: RealSymbols::new(mass)?, grid })
    }

    pub fn symbols(&self) -> &RealSymbols {
        &self.symbols
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn mass(&self) -> f64 {
        self.symbols.mass()
    }

    fn apply(&self, spectrum: &mut SpectralField, t: f64, dir: Direction) {
        let grid = self.grid;
        for idx in 0..grid.len() {
            let k = grid.dynamic_wave_vector(idx);
            let g = match dir {
                Direction::Forward => self.symbols.propagator(&k, t),
                Direction::Adjoint => self.symbols.adjoint_propagator(&k, t),
            };
            spectrum.set_mode(idx, &(g * spectrum.mode(idx)));
        }
    }

    /// `Ĝ_t(k)·ℛψ̂(k)` for every mode.
    pub fn evolve_spectral(&self, spectrum: &SpectralField, t: f64) -> Result<SpectralField> {
        self.grid.ensure_same(spectrum.grid())?;
        let mut out = spectrum.clone();
        self.apply(&mut out, t, Direction::Forward);
        Ok(out)
    }

    /// `U(t)` acting on `ℛψ`.
    pub fn evolve_real(&self, field: &RealField8, t: f64) -> Result<RealField8> {
        self.grid.ensure_same(field.grid())?;
        if t == 0.0 {
            return Ok(field.clone());
        }
        let mut spectrum = fft_forward(field);
        self.apply(&mut spectrum, t, Direction::Forward);
        Ok(fft_inverse(&spectrum))
    }

    pub fn evolve(&self, psi: &SpinorField, t: f64) -> Result<SpinorField> {
        Ok(complexify(&self.evolve_real(&realify(psi), t)?))
    }

    /// [`evolve_real`](Self::evolve_real) plus the wraparound flag for data supported
    /// in `|x| ≤ support_radius` with correlations of range `correlation_range`.
    pub fn evolve_checked(
        &self,
        field: &RealField8,
        t: f64,
        support_radius: f64,
        correlation_range: f64,
    ) -> Result<Evolution> {
        let wraparound = t.abs() + support_radius + correlation_range >= self.grid.half_period();
        Ok(Evolution { field: self.evolve_real(field, t)?, wraparound })
    }

    /// Cross-check route: the complex 4×4 symbol applied to `ψ̂(k)`.
    pub fn evolve_complex4(&self, psi: &SpinorField, t: f64) -> Result<SpinorField> {
        self.grid.ensure_same(psi.grid())?;
        let dirac = DiracMatrices::standard();
        let mut spectra = spinor_fft_forward(psi);
        for idx in 0..self.grid.len() {
            let k = self.grid.dynamic_wave_vector(idx);
            let g = dirac.propagator(&k, t, self.mass());
            let v = g * Vec4::from_fn(|j, _| spectra[j][idx]);
            for (j, s) in spectra.iter_mut().enumerate() {
                s[idx] = v[j];
            }
        }
        Ok(spinor_fft_inverse(self.grid, spectra))
    }

    /// `U′(t)φ`, the solution of `φ̇ = (α·∇ + iβm)φ` in real form.
    pub fn adjoint_evolve_field(&self, field: &RealField8, t: f64) -> Result<RealField8> {
        self.grid.ensure_same(field.grid())?;
        if t == 0.0 {
            return Ok(field.clone());
        }
        let mut spectrum = fft_forward(field);
        self.apply(&mut spectrum, t, Direction::Adjoint);
        Ok(fft_inverse(&spectrum))
    }

    pub fn adjoint_evolve(&self, phi: &TestFunction, t: f64) -> Result<RealField8> {
        self.adjoint_evolve_field(phi.field(), t)
    }

    /// Precomputes `Ĝ_t(k)` on every mode for repeated use at one `t`.
    /// Costs 64 complex numbers per mode.
    pub fn cached(&self, t: f64) -> CachedPropagator {
        let symbols =
            (0..self.grid.len()).map(|idx| self.symbols.propagator(&self.grid.dynamic_wave_vector(idx), t)).collect();
        CachedPropagator { grid: self.grid, t, symbols }
    }

    /// Compares `‖U(t)ψ₀‖_{0,R}` with `‖ψ₀‖_{0,R+|t|}`.
    pub fn local_estimate_check(&self, psi0: &RealField8, t: f64, radius: f64) -> Result<LocalEstimate> {
        let outer = radius + t.abs();
        if outer >= self.grid.half_period() {
            return Err(Error::BallWraps { radius: outer, half_period: self.grid.half_period() });
        }
        let evolved = self.evolve_real(psi0, t)?;
        let evolved_seminorm = local_seminorm(&evolved, radius)?;
        let initial_seminorm = local_seminorm(psi0, outer)?;
        let ratio = if initial_seminorm > 0.0 {
            evolved_seminorm / initial_seminorm
        } else if evolved_seminorm == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Ok(LocalEstimate { t, radius, evolved_seminorm, initial_seminorm, ratio })
    }
}

#[derive(Debug, Clone)]
pub struct CachedPropagator {
    grid: GridSpec,
    t: f64,
    symbols: Vec<Mat8>,
}

impl CachedPropagator {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn evolve_real(&self, field: &RealField8) -> Result<RealField8> {
        self.grid.ensure_same(field.grid())?;
        let mut spectrum = fft_forward(field);
        for (idx, g) in self.symbols.iter().enumerate() {
            spectrum.set_mode(idx, &(g * spectrum.mode(idx)));
        }
        Ok(fft_inverse(&spectrum))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalEstimate {
    pub t: f64,
    pub radius: f64,
    /// `‖U(t)ψ₀‖_{0,R}`
    pub evolved_seminorm: f64,
    /// `‖ψ₀‖_{0,R+|t|}`
    pub initial_seminorm: f64,
    pub ratio: f64,
}

/// Smallest `R` such that `|ψ(x)| < floor` at every node with `|x| > R`.
pub fn support_radius<F: NodeField>(field: &F, floor: f64) -> f64 {
    let grid = field.grid();
    (0..grid.len()).filter(|&idx| field.node_norm(idx) >= floor).map(|idx| grid.radius(idx)).fold(0.0, f64::max)
}

/// Largest deviation of `U(t)` from an isometry, `|‖U(t)ψ‖² / ‖ψ‖² − 1|`.
pub fn charge_defect(before: &RealField8, after: &RealField8) -> f64 {
    (after.charge() / before.charge() - 1.0).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::Vec8;
    use crate::grid::{inner, unit_weights};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: GridSpec, seed: u64) -> RealField8 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = RealField8::zeros(grid);
        for j in 0..8 {
            f.component_mut(j).iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        }
        f
    }

    fn setup(n: usize, length: f64) -> Propagator {
        Propagator::new(1.0, GridSpec::new(n, length).unwrap()).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let p = setup(8, 8.0);
        let f = random_field(*p.grid(), 1);
        assert_eq!(p.evolve_real(&f, 0.0).unwrap(), f);
        assert_eq!(p.adjoint_evolve_field(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn single_mode_is_multiplied_by_symbol() {
        let p = setup(16, 16.0);
        let g = *p.grid();
        let idx = g.index(1, 3, 14);
        let mut spec = SpectralField::zeros(g);
        let v = Vec8::from_fn(|j, _| Complex64::new(j as f64 - 3.0, 0.5 * j as f64));
        spec.set_mode(idx, &v);
        let t = 2.3;
        let out = p.evolve_spectral(&spec, t).unwrap();
        let expect = p.symbols().propagator(&g.wave_vector(idx), t) * v;
        assert!((out.mode(idx) - expect).norm() < 1e-14);
        assert_eq!(out.mode(0).norm(), 0.0);
    }

    #[test]
    fn charge_is_conserved() {
        let p = setup(16, 16.0);
        let f = random_field(*p.grid(), 2);
        let out = p.evolve_real(&f, 17.3).unwrap();
        assert!(charge_defect(&f, &out) < 1e-10);
    }

    #[test]
    fn group_law_and_time_reversal() {
        let p = setup(16, 16.0);
        let f = random_field(*p.grid(), 3);
        let a = p.evolve_real(&p.evolve_real(&f, 1.7).unwrap(), 2.6).unwrap();
        let b = p.evolve_real(&f, 4.3).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10);
        let back = p.evolve_real(&p.evolve_real(&f, 5.5).unwrap(), -5.5).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-10);
    }

    #[test]
    fn complex_route_agrees_with_real_route() {
        let p = setup(16, 12.0);
        let psi = complexify(&random_field(*p.grid(), 4));
        for t in [0.3, 4.0, -2.2] {
            let a = p.evolve(&psi, t).unwrap();
            let b = p.evolve_complex4(&psi, t).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn duality_with_adjoint_group() {
        let p = setup(16, 16.0);
        let psi = random_field(*p.grid(), 5);
        let phi = random_field(*p.grid(), 6);
        for t in [0.7, 3.1, 9.0] {
            let lhs = inner(&p.evolve_real(&psi, t).unwrap(), &phi).unwrap();
            let rhs = inner(&psi, &p.adjoint_evolve_field(&phi, t).unwrap()).unwrap();
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn cached_matches_direct() {
        let p = setup(8, 8.0);
        let f = random_field(*p.grid(), 7);
        let c = p.cached(1.25);
        assert_eq!(c.t(), 1.25);
        assert!(c.evolve_real(&f).unwrap().max_abs_diff(&p.evolve_real(&f, 1.25).unwrap()) < 1e-15);
    }

    #[test]
    fn wraparound_flag() {
        let p = setup(16, 16.0);
        let f = random_field(*p.grid(), 8);
        assert!(!p.evolve_checked(&f, 3.0, 2.0, 1.0).unwrap().wraparound);
        assert!(p.evolve_checked(&f, 5.0, 2.0, 1.0).unwrap().wraparound);
    }

    #[test]
    fn support_radius_basics() {
        let g = GridSpec::new(16, 16.0).unwrap();
        let point = TestFunction::point(g, unit_weights(0));
        assert_eq!(support_radius(point.field(), 1e-9), 0.0);
        assert_eq!(support_radius(point.field(), f64::INFINITY), 0.0);
        let bump = TestFunction::bump(g, 3.0, unit_weights(0));
        assert!(support_radius(bump.field(), 1e-300) <= 3.0);
    }

    #[test]
    fn local_estimate_trivial_cases() {
        let p = setup(32, 32.0);
        let f = random_field(*p.grid(), 9);
        let r0 = p.local_estimate_check(&f, 0.0, 5.0).unwrap();
        assert!(r0.ratio <= 1.0);
        assert!(p.local_estimate_check(&f, 10.0, 6.0).is_err());
        let bump = TestFunction::truncated_gaussian(*p.grid(), 1.5, 1e-12, unit_weights(1));
        let r = p.local_estimate_check(bump.field(), 3.0, 12.0).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-8, "{r:?}");
    }
}
