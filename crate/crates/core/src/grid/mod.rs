//! Periodic grids on the torus `[−L/2, L/2)³`, spinor and real 8-component
//! fields, their Fourier transforms, inner products and local seminorms.
//!
//! Node `(i, j, l)` sits at `h·(ĩ, j̃, l̃)` where `ĩ = i` for `i < n/2` and `i − n`
//! otherwise, so the origin is node 0 and distances are periodic. Transforms
//! are unscaled in the forward (`e^{+ik·x}`) direction and scaled by `n⁻³` in
//! the inverse; physical integrals carry the cell volume `h³`.

pub mod dump;
pub mod fft;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{Vec8, WaveVector};
use crate::error::{Error, Result};
use fft::Fft3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    length: f64,
}

impl GridSpec {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("points per axis must be a power of two >= 8, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!("period must be positive, got {length}")));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn half_period(&self) -> f64 {
        0.5 * self.length
    }

    /// Number of nodes, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n + j) * self.n + l
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Signed integer coordinate of axis index `i` in `−n/2..n/2`.
    pub fn centered(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Index of the node at signed integer coordinates, wrapped onto the torus.
    pub fn wrapped_index(&self, c: [i64; 3]) -> usize {
        let n = self.n as i64;
        let w = |v: i64| v.rem_euclid(n) as usize;
        self.index(w(c[0]), w(c[1]), w(c[2]))
    }

    pub fn position(&self, idx: usize) -> WaveVector {
        let [i, j, l] = self.coords(idx);
        let h = self.spacing();
        WaveVector::new(h * self.centered(i) as f64, h * self.centered(j) as f64, h * self.centered(l) as f64)
    }

    /// Periodic distance from the origin.
    pub fn radius(&self, idx: usize) -> f64 {
        self.position(idx).norm()
    }

    pub fn wave_number(&self, i: usize) -> f64 {
        2.0 * PI * self.centered(i) as f64 / self.length
    }

    /// Wave vector `2π·m/L` of mode `idx`, with `m ∈ {−n/2, …, n/2−1}`.
    pub fn wave_vector(&self, idx: usize) -> WaveVector {
        let [i, j, l] = self.coords(idx);
        WaveVector::new(self.wave_number(i), self.wave_number(j), self.wave_number(l))
    }

    /// Wave vector used by the dynamics: Nyquist components are set to zero so
    /// that the symbol of the odd first-order operator is real-preserving.
    pub fn dynamic_wave_vector(&self, idx: usize) -> WaveVector {
        let [i, j, l] = self.coords(idx);
        let half = self.n / 2;
        let k = |a: usize| if a == half { 0.0 } else { self.wave_number(a) };
        WaveVector::new(k(i), k(j), k(l))
    }

    /// Index of the mode (or node) `−k` (or `−x`).
    pub fn negated_index(&self, idx: usize) -> usize {
        let n = self.n;
        let [i, j, l] = self.coords(idx);
        self.index((n - i) % n, (n - j) % n, (n - l) % n)
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: format!("n={}, L={}", self.n, self.length),
                right: format!("n={}, L={}", other.n, other.length),
            })
        }
    }

    fn fft(&self) -> std::sync::Arc<Fft3> {
        Fft3::shared(self.n)
    }
}

/// Real 8-component field `ℛψ = (Re ψ₁..Re ψ₄, Im ψ₁..Im ψ₄)`, stored by component.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField8 {
    grid: GridSpec,
    comps: [Vec<f64>; 8],
}

impl RealField8 {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, comps: std::array::from_fn(|_| vec![0.0; grid.len()]) }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&WaveVector) -> [f64; 8]) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            out.set_value(idx, f(&grid.position(idx)));
        }
        out
    }

    pub fn from_components(grid: GridSpec, comps: [Vec<f64>; 8]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidArgument("component length does not match grid".into()));
        }
        Ok(Self { grid, comps })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, j: usize) -> &[f64] {
        &self.comps[j]
    }

    pub fn component_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.comps[j]
    }

    pub fn components(&self) -> &[Vec<f64>; 8] {
        &self.comps
    }

    pub fn into_components(self) -> [Vec<f64>; 8] {
        self.comps
    }

    pub fn value(&self, idx: usize) -> [f64; 8] {
        std::array::from_fn(|j| self.comps[j][idx])
    }

    pub fn set_value(&mut self, idx: usize, v: [f64; 8]) {
        for (c, x) in self.comps.iter_mut().zip(v) {
            c[idx] = x;
        }
    }

    /// `|ℛψ(x)|` at one node.
    pub fn node_norm(&self, idx: usize) -> f64 {
        self.comps.iter().map(|c| c[idx] * c[idx]).sum::<f64>().sqrt()
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.grid.len()).map(|i| self.node_norm(i)).fold(0.0, f64::max)
    }

    /// `‖ψ‖²_{L²} = h³ Σ |ℛψ(x)|²`.
    pub fn charge(&self) -> f64 {
        inner(self, self).expect("same grid")
    }

    pub fn scale(&mut self, s: f64) {
        self.comps.iter_mut().flatten().for_each(|v| *v *= s);
    }

    pub fn max_abs_diff(&self, other: &RealField8) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Pointwise product with a scalar weight per node.
    pub fn masked(&self, weight: impl Fn(usize) -> f64) -> RealField8 {
        let mut out = self.clone();
        for idx in 0..self.grid.len() {
            let w = weight(idx);
            for c in out.comps.iter_mut() {
                c[idx] *= w;
            }
        }
        out
    }
}

/// Complex 4-spinor field `ψ(x) ∈ ℂ⁴`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: GridSpec,
    comps: [Vec<Complex64>; 4],
}

impl SpinorField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, comps: std::array::from_fn(|_| vec![Complex64::default(); grid.len()]) }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&WaveVector) -> [Complex64; 4]) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let v = f(&grid.position(idx));
            for (c, z) in out.comps.iter_mut().zip(v) {
                c[idx] = z;
            }
        }
        out
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, j: usize) -> &[Complex64] {
        &self.comps[j]
    }

    pub fn component_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.comps[j]
    }

    pub fn value(&self, idx: usize) -> [Complex64; 4] {
        std::array::from_fn(|j| self.comps[j][idx])
    }

    pub fn node_norm(&self, idx: usize) -> f64 {
        self.comps.iter().map(|c| c[idx].norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn charge(&self) -> f64 {
        self.grid.cell_volume() * self.comps.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn max_abs_diff(&self, other: &SpinorField) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}

/// `ℛψ = (Re ψ, Im ψ)`.
pub fn realify(psi: &SpinorField) -> RealField8 {
    let comps = std::array::from_fn(|j| {
        if j < 4 {
            psi.comps[j].iter().map(|z| z.re).collect()
        } else {
            psi.comps[j - 4].iter().map(|z| z.im).collect()
        }
    });
    RealField8 { grid: psi.grid, comps }
}

/// Inverse of [`realify`].
pub fn complexify(f: &RealField8) -> SpinorField {
    let comps = std::array::from_fn(|j| {
        f.comps[j].iter().zip(&f.comps[j + 4]).map(|(&re, &im)| Complex64::new(re, im)).collect()
    });
    SpinorField { grid: f.grid, comps }
}

/// `⟨ψ, φ⟩ = h³ Σₓ Σⱼ ℛʲψ(x) ℛʲφ(x)`.
pub fn inner(a: &RealField8, b: &RealField8) -> Result<f64> {
    a.grid.ensure_same(&b.grid)?;
    let sum: f64 = a.comps.iter().zip(&b.comps).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>()).sum();
    Ok(a.grid.cell_volume() * sum)
}

fn check_ball(grid: &GridSpec, radius: f64) -> Result<()> {
    if radius >= grid.half_period() || !radius.is_finite() {
        return Err(Error::BallWraps { radius, half_period: grid.half_period() });
    }
    if radius <= 0.0 {
        return Err(Error::InvalidArgument(format!("seminorm radius must be positive, got {radius}")));
    }
    Ok(())
}

/// Anything with a pointwise norm on a grid.
pub trait NodeField {
    fn grid(&self) -> &GridSpec;
    fn node_norm(&self, idx: usize) -> f64;
}

impl NodeField for RealField8 {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn node_norm(&self, idx: usize) -> f64 {
        RealField8::node_norm(self, idx)
    }
}

impl NodeField for SpinorField {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn node_norm(&self, idx: usize) -> f64 {
        SpinorField::node_norm(self, idx)
    }
}

/// `‖ψ‖_{0,R} = (h³ Σ_{|x|<R} |ψ(x)|²)^{1/2}`; balls reaching `L/2` are rejected.
pub fn local_seminorm<F: NodeField>(f: &F, radius: f64) -> Result<f64> {
    let grid = f.grid();
    check_ball(grid, radius)?;
    let sum: f64 = (0..grid.len()).filter(|&idx| grid.radius(idx) < radius).map(|idx| f.node_norm(idx).powi(2)).sum();
    Ok((grid.cell_volume() * sum).sqrt())
}

/// Discrete transform of `ℛψ`: eight complex arrays `ℛψ̂ʲ(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    comps: [Vec<Complex64>; 8],
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, comps: std::array::from_fn(|_| vec![Complex64::default(); grid.len()]) }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, j: usize) -> &[Complex64] {
        &self.comps[j]
    }

    pub fn mode(&self, idx: usize) -> Vec8 {
        Vec8::from_fn(|j, _| self.comps[j][idx])
    }

    pub fn set_mode(&mut self, idx: usize, v: &Vec8) {
        for (j, c) in self.comps.iter_mut().enumerate() {
            c[idx] = v[j];
        }
    }

    /// Spectral-side inner product `(h³/n³) Σₖ Re ℛψ̂(k)^† ℛφ̂(k)`, equal to `⟨ψ, φ⟩`.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let sum: f64 = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum::<f64>())
            .sum();
        Ok(self.grid.cell_volume() * sum / self.grid.len() as f64)
    }

    /// Largest violation of `f̂(−k) = conj f̂(k)` over all components and modes.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        self.comps
            .iter()
            .flat_map(|c| (0..g.len()).map(move |i| (c[i] - c[g.negated_index(i)].conj()).norm()))
            .fold(0.0, f64::max)
    }
}

/// Forward transform of a real field. Components `j` and `j+4` are packed into
/// one complex transform and separated with the Hermitian symmetry of real input.
pub fn fft_forward(f: &RealField8) -> SpectralField {
    let grid = f.grid;
    let fft = grid.fft();
    let mut out = SpectralField::zeros(grid);
    for j in 0..4 {
        let mut buf: Vec<Complex64> =
            f.comps[j].iter().zip(&f.comps[j + 4]).map(|(&re, &im)| Complex64::new(re, im)).collect();
        fft.forward(&mut buf);
        let (lo, hi) = out.comps.split_at_mut(4);
        let (re_part, im_part) = (&mut lo[j], &mut hi[j]);
        for idx in 0..grid.len() {
            let a = buf[idx];
            let b = buf[grid.negated_index(idx)].conj();
            re_part[idx] = (a + b) * 0.5;
            im_part[idx] = (a - b) * Complex64::new(0.0, -0.5);
        }
    }
    out
}

/// Inverse transform back to a real field. Assumes the spectrum is Hermitian
/// (as produced by [`fft_forward`] and preserved by the dynamics); any
/// anti-Hermitian part is discarded.
pub fn fft_inverse(s: &SpectralField) -> RealField8 {
    let grid = s.grid;
    let fft = grid.fft();
    let mut out = RealField8::zeros(grid);
    let i = Complex64::new(0.0, 1.0);
    for j in 0..4 {
        let mut buf: Vec<Complex64> = s.comps[j].iter().zip(&s.comps[j + 4]).map(|(&a, &b)| a + i * b).collect();
        fft.inverse(&mut buf);
        let (lo, hi) = out.comps.split_at_mut(4);
        for (idx, z) in buf.iter().enumerate() {
            lo[j][idx] = z.re;
            hi[j][idx] = z.im;
        }
    }
    out
}

/// Forward transforms of the four complex spinor components.
pub fn spinor_fft_forward(psi: &SpinorField) -> [Vec<Complex64>; 4] {
    let fft = psi.grid.fft();
    std::array::from_fn(|j| {
        let mut buf = psi.comps[j].clone();
        fft.forward(&mut buf);
        buf
    })
}

pub fn spinor_fft_inverse(grid: GridSpec, mut spectra: [Vec<Complex64>; 4]) -> SpinorField {
    let fft = grid.fft();
    for buf in spectra.iter_mut() {
        fft.inverse(buf);
    }
    SpinorField { grid, comps: spectra }
}

/// A real test function together with the radius of a ball containing its support.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    field: RealField8,
    radius: f64,
}

impl TestFunction {
    /// Wraps a field, checking that it vanishes outside `|x| ≤ radius`.
    pub fn new(field: RealField8, radius: f64) -> Result<Self> {
        let g = *field.grid();
        if let Some(idx) = (0..g.len()).find(|&i| g.radius(i) > radius && field.node_norm(i) != 0.0) {
            return Err(Error::InvalidArgument(format!(
                "test function is nonzero at |x| = {:.3} outside the declared radius {radius}",
                g.radius(idx)
            )));
        }
        Ok(Self { field, radius })
    }

    /// `exp(1 − 1/(1 − |x|²/r̄²))` inside the ball, zero outside, times `weights`.
    pub fn bump(grid: GridSpec, radius: f64, weights: [f64; 8]) -> Self {
        let field = RealField8::from_fn(grid, |x| {
            let s = x.norm_squared() / (radius * radius);
            let b = if s < 1.0 { (1.0 - 1.0 / (1.0 - s)).exp() } else { 0.0 };
            weights.map(|w| w * b)
        });
        Self { field, radius }
    }

    /// Gaussian `exp(−|x|²/2σ²)` cut to zero where it drops below `floor`.
    pub fn truncated_gaussian(grid: GridSpec, sigma: f64, floor: f64, weights: [f64; 8]) -> Self {
        let radius = sigma * (2.0 * (1.0 / floor).ln()).sqrt();
        let field = RealField8::from_fn(grid, |x| {
            let r = x.norm();
            let g = if r <= radius { (-0.5 * r * r / (sigma * sigma)).exp() } else { 0.0 };
            weights.map(|w| w * g)
        });
        Self { field, radius }
    }

    /// Unit mass at the origin node (`h³`-normalised values are not applied).
    pub fn point(grid: GridSpec, weights: [f64; 8]) -> Self {
        let mut field = RealField8::zeros(grid);
        field.set_value(0, weights);
        Self { field, radius: 0.0 }
    }

    pub fn field(&self) -> &RealField8 {
        &self.field
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn grid(&self) -> &GridSpec {
        self.field.grid()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut field = self.field.clone();
        field.scale(s);
        Self { field, radius: self.radius }
    }
}

/// Unit vector along component `j` of ℛψ.
pub fn unit_weights(j: usize) -> [f64; 8] {
    std::array::from_fn(|i| if i == j { 1.0 } else { 0.0 })
}
