//! Dirac matrices in standard form, their real 8×8 representation and the
//! Fourier symbols of the free Dirac dynamics.
//!
//! Fourier convention: `Fφ(k) = ∫ e^{ik·x} φ(x) dx`, so `∂ⱼ` has symbol `−ikⱼ`.
//! The real representation acts on `ℛψ = (Re ψ, Im ψ)`; in it the equation
//! reads `ℛψ̇ = −P(∇)ℛψ` with `P(∇) = Λ·∇ + mΛ₀`.

use nalgebra::{SMatrix, SVector, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat2 = SMatrix<Complex64, 2, 2>;
pub type Mat4 = SMatrix<Complex64, 4, 4>;
pub type Mat8 = SMatrix<Complex64, 8, 8>;
pub type Vec4 = SVector<Complex64, 4>;
pub type Vec8 = SVector<Complex64, 8>;
pub type RealMat8 = SMatrix<f64, 8, 8>;
pub type WaveVector = Vector3<f64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli() -> [Mat2; 3] {
    let z = c(0.0);
    let one = c(1.0);
    [Mat2::new(z, one, one, z), Mat2::new(z, -I, I, z), Mat2::new(one, z, z, -one)]
}

/// The Dirac matrices `α₁, α₂, α₃, β` in standard (Dirac) form.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracMatrices {
    pub alpha: [Mat4; 3],
    pub beta: Mat4,
}

impl DiracMatrices {
    pub fn standard() -> Self {
        build_dirac_matrices()
    }

    /// `α·k` for a real wave vector.
    pub fn alpha_dot(&self, k: &WaveVector) -> Mat4 {
        self.alpha[0] * c(k[0]) + self.alpha[1] * c(k[1]) + self.alpha[2] * c(k[2])
    }

    /// Fourier symbol of the complex 4-spinor evolution,
    /// `cos ωt − (α·(−ik) + iβm) sin ωt / ω`.
    pub fn propagator(&self, k: &WaveVector, t: f64, mass: f64) -> Mat4 {
        let omega = (k.norm_squared() + mass * mass).sqrt();
        let generator = self.alpha_dot(k) * (-I) + self.beta * (I * mass);
        let (s, co) = (omega * t).sin_cos();
        Mat4::identity() * c(co) - generator * c(s / omega)
    }

    /// Symbol of the adjoint group acting on complex test functions.
    pub fn adjoint_propagator(&self, k: &WaveVector, t: f64, mass: f64) -> Mat4 {
        self.propagator(k, t, mass).adjoint()
    }
}

/// Builds `β = diag(I, −I)` and `αₖ = [[0, σₖ], [σₖ, 0]]` from 2×2 blocks.
pub fn build_dirac_matrices() -> DiracMatrices {
    let sigma = pauli();
    let id = Mat2::identity();
    let zero = Mat2::zeros();

    let mut beta = Mat4::zeros();
    beta.fixed_view_mut::<2, 2>(0, 0).copy_from(&id);
    beta.fixed_view_mut::<2, 2>(2, 2).copy_from(&(-id));

    let alpha = sigma.map(|s| {
        let mut a = Mat4::zeros();
        a.fixed_view_mut::<2, 2>(0, 0).copy_from(&zero);
        a.fixed_view_mut::<2, 2>(0, 2).copy_from(&s);
        a.fixed_view_mut::<2, 2>(2, 0).copy_from(&s);
        a
    });

    DiracMatrices { alpha, beta }
}

/// Real 8×8 matrix of the ℝ-linear map `ψ ↦ Mψ` written on `(Re ψ, Im ψ)`.
pub fn realify_matrix(m: &Mat4) -> RealMat8 {
    let mut out = RealMat8::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + 4)] = -z.im;
            out[(i + 4, j)] = z.im;
            out[(i + 4, j + 4)] = z.re;
        }
    }
    out
}

fn real_part_checked(m: &Mat4) -> SMatrix<f64, 4, 4> {
    debug_assert!(m.iter().all(|z| z.im == 0.0));
    m.map(|z| z.re)
}

/// The real symbols `Λ₁, Λ₂, Λ₃` (symmetric), `Λ₀` (antisymmetric) and the mass.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymbols {
    pub lambda: [RealMat8; 3],
    pub lambda0: RealMat8,
    mass: f64,
}

/// Assembles `Λ₁ = diag(α₁, α₁)`, `Λ₂ = [[0, iα₂], [−iα₂, 0]]`, `Λ₃ = diag(α₃, α₃)`
/// and `Λ₀ = [[0, −β], [β, 0]]`.
pub fn build_real_symbols(mass: f64) -> Result<RealSymbols> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::NonPositiveMass(mass));
    }
    let dirac = build_dirac_matrices();
    let a1 = real_part_checked(&dirac.alpha[0]);
    let ia2 = real_part_checked(&(dirac.alpha[1] * I));
    let a3 = real_part_checked(&dirac.alpha[2]);
    let beta = real_part_checked(&dirac.beta);

    let block = |tl: SMatrix<f64, 4, 4>, tr, bl, br| {
        let mut m = RealMat8::zeros();
        m.fixed_view_mut::<4, 4>(0, 0).copy_from(&tl);
        m.fixed_view_mut::<4, 4>(0, 4).copy_from(&tr);
        m.fixed_view_mut::<4, 4>(4, 0).copy_from(&bl);
        m.fixed_view_mut::<4, 4>(4, 4).copy_from(&br);
        m
    };
    let z = SMatrix::<f64, 4, 4>::zeros();

    Ok(RealSymbols {
        lambda: [block(a1, z, z, a1), block(z, ia2, -ia2, z), block(a3, z, z, a3)],
        lambda0: block(z, -beta, beta, z),
        mass,
    })
}

impl RealSymbols {
    pub fn new(mass: f64) -> Result<Self> {
        build_real_symbols(mass)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `ω(k) = √(|k|² + m²)`.
    pub fn dispersion(&self, k: &WaveVector) -> f64 {
        (k.norm_squared() + self.mass * self.mass).sqrt()
    }

    pub fn lambda_dot(&self, k: &WaveVector) -> RealMat8 {
        self.lambda[0] * k[0] + self.lambda[1] * k[1] + self.lambda[2] * k[2]
    }

    /// `P(−ik) = −i(Λ·k) + mΛ₀`. Skew-Hermitian with `P(−ik)² = −ω²I`.
    pub fn symbol_p(&self, k: &WaveVector) -> Mat8 {
        let ld = self.lambda_dot(k);
        let m = self.mass;
        Mat8::from_fn(|i, j| Complex64::new(m * self.lambda0[(i, j)], -ld[(i, j)]))
    }

    /// `Ĝ_t(k) = cos ωt − P(−ik) sin ωt / ω`, the symbol of `U(t)` on `ℛψ̂`.
    pub fn propagator(&self, k: &WaveVector, t: f64) -> Mat8 {
        self.propagator_with_sign(k, t, -1.0)
    }

    /// `Ĝ′_t(k) = cos ωt + P(−ik) sin ωt / ω = Ĝ_t(k)^†`, the symbol of `U′(t)`.
    pub fn adjoint_propagator(&self, k: &WaveVector, t: f64) -> Mat8 {
        self.propagator_with_sign(k, t, 1.0)
    }

    fn propagator_with_sign(&self, k: &WaveVector, t: f64, sign: f64) -> Mat8 {
        let omega = self.dispersion(k);
        let (s, co) = (omega * t).sin_cos();
        let scale = sign * s / omega;
        let ld = self.lambda_dot(k);
        let m = self.mass;
        Mat8::from_fn(|i, j| {
            let diag = if i == j { co } else { 0.0 };
            Complex64::new(diag + scale * m * self.lambda0[(i, j)], -scale * ld[(i, j)])
        })
    }

    /// `J(k) = P(−ik)/ω(k)`, which squares to `−I` and generates `Ĝ_t = exp(−ωtJ)`.
    pub fn unit_generator(&self, k: &WaveVector) -> Mat8 {
        self.symbol_p(k) / c(self.dispersion(k))
    }
}

pub fn to_complex(m: &RealMat8) -> Mat8 {
    m.map(c)
}

pub fn max_abs(m: &Mat8) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &RealMat8) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.abs()))
}
