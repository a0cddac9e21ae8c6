//! Exact second-order statistics of the evolved measure: `q̂_t = Ĝ_t q̂₀ Ĝ_t^†`,
//! its time-independent part `q̂_∞`, position-space tables and the quadratic
//! forms `𝒬(φ, φ)`.
//!
//! With `J = P(−ik)/ω` (so `J² = −I`, `Ĝ_t = cos ωt − J sin ωt`),
//!
//! ```text
//! q̂_t = ½(q̂₀ + J q̂₀ J^†) + cos 2ωt · ½(q̂₀ − J q̂₀ J^†) − sin 2ωt · ½[J, q̂₀]
//! ```
//!
//! and `q̂_∞ = ½(q̂₀ + J q̂₀ J^†) = ½q̂₀ + ½ P(−ik) q̂₀ Pᵀ(ik) / (k² + m²)`.
//! All grid functions use the dynamic wave vector for `Ĝ_t` and `J`, matching
//! [`Propagator`](crate::propagator::Propagator).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::clifford::{Mat8, RealMat8, RealSymbols, Vec8, WaveVector};
use crate::error::Result;
use crate::grid::fft::Fft3;
use crate::grid::{fft_forward, GridSpec, RealField8};
use crate::measures::GridSymbol;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `q̂_t(k) = Ĝ_t(k) q̂₀ Ĝ_t(k)^†`.
pub fn q_hat_t(symbols: &RealSymbols, k: &WaveVector, t: f64, q0: &Mat8) -> Mat8 {
    let g = symbols.propagator(k, t);
    g * q0 * g.adjoint()
}

/// The three pieces `(q̂_∞, A, B)` with `q̂_t = q̂_∞ + cos 2ωt·A + sin 2ωt·B`.
pub fn oscillating_parts(symbols: &RealSymbols, k: &WaveVector, q0: &Mat8) -> (Mat8, Mat8, Mat8) {
    let j = symbols.unit_generator(k);
    let jqj = j * q0 * j.adjoint();
    let half = real(0.5);
    let mean = (q0 + jqj) * half;
    let a = (q0 - jqj) * half;
    let b = (q0 * j - j * q0) * half;
    (mean, a, b)
}

/// `q̂_t` assembled from the cos 2ωt / sin 2ωt decomposition.
pub fn q_hat_t_expanded(symbols: &RealSymbols, k: &WaveVector, t: f64, q0: &Mat8) -> Mat8 {
    let (mean, a, b) = oscillating_parts(symbols, k, q0);
    let (s, c) = (2.0 * symbols.dispersion(k) * t).sin_cos();
    mean + a * real(c) + b * real(s)
}

/// `q̂_∞(k) = ½q̂₀ + ½ P(−ik) q̂₀ Pᵀ(ik) / ω²`, where `Pᵀ(ik) = P(−ik)^†`.
pub fn q_hat_inf(symbols: &RealSymbols, k: &WaveVector, q0: &Mat8) -> Mat8 {
    let p = symbols.symbol_p(k);
    let w2 = symbols.dispersion(k).powi(2);
    (q0 + p * q0 * p.adjoint() / real(w2)) * real(0.5)
}

/// `q̂_t` on every grid mode.
pub fn evolved_symbol(symbols: &RealSymbols, q0: &GridSymbol, t: f64) -> GridSymbol {
    let grid = *q0.grid();
    let values =
        (0..grid.len()).map(|idx| q_hat_t(symbols, &grid.dynamic_wave_vector(idx), t, &q0.mode(idx))).collect();
    GridSymbol::full(grid, values, f64::INFINITY).expect("table matches grid")
}

/// `q̂_∞` on every grid mode.
pub fn equilibrium_symbol(symbols: &RealSymbols, q0: &GridSymbol) -> GridSymbol {
    let grid = *q0.grid();
    let values = (0..grid.len()).map(|idx| q_hat_inf(symbols, &grid.dynamic_wave_vector(idx), &q0.mode(idx))).collect();
    GridSymbol::full(grid, values, f64::INFINITY).expect("table matches grid")
}

/// `q(z)` at one offset, with the size of the discarded imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionEntry {
    pub offset: [i64; 3],
    pub value: RealMat8,
    pub imaginary_residue: f64,
}

/// `q(z) = (h³n³)⁻¹ Σ_k e^{−ik·z} q̂(k)` evaluated directly at cell offsets.
pub fn q_position(symbol: &GridSymbol, offsets: &[[i64; 3]]) -> Vec<PositionEntry> {
    let grid = *symbol.grid();
    let h = grid.spacing();
    let norm = 1.0 / (grid.cell_volume() * grid.len() as f64);
    let mut sums = vec![Mat8::zeros(); offsets.len()];
    for idx in 0..grid.len() {
        let k = grid.wave_vector(idx);
        let q = symbol.mode(idx);
        for (s, z) in sums.iter_mut().zip(offsets) {
            let phase = -h * (k[0] * z[0] as f64 + k[1] * z[1] as f64 + k[2] * z[2] as f64);
            *s += q * Complex64::from_polar(1.0, phase);
        }
    }
    offsets
        .iter()
        .zip(sums)
        .map(|(z, s)| PositionEntry {
            offset: *z,
            value: s.map(|c| c.re * norm),
            imaginary_residue: s.iter().fold(0.0, |a, c| a.max((c.im * norm).abs())),
        })
        .collect()
}

/// Position-space covariance on the whole grid, one real array per matrix entry.
#[derive(Debug, Clone)]
pub struct PositionTable {
    grid: GridSpec,
    entries: Vec<Vec<f64>>,
    imaginary_residue: f64,
}

impl PositionTable {
    /// Inverse transform of every entry of `q̂`.
    pub fn from_symbol(symbol: &GridSymbol) -> Self {
        let grid = *symbol.grid();
        let fft = Fft3::shared(grid.n());
        let scale = 1.0 / grid.cell_volume();
        let mut entries = Vec::with_capacity(64);
        let mut imaginary_residue: f64 = 0.0;
        let modes: Vec<Mat8> = (0..grid.len()).map(|idx| symbol.mode(idx)).collect();
        for a in 0..8 {
            for b in 0..8 {
                let mut buf: Vec<Complex64> = modes.iter().map(|m| m[(a, b)]).collect();
                fft.inverse(&mut buf);
                imaginary_residue = buf.iter().fold(imaginary_residue, |r, z| r.max((z.im * scale).abs()));
                entries.push(buf.iter().map(|z| z.re * scale).collect());
            }
        }
        Self { grid, entries, imaginary_residue }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn imaginary_residue(&self) -> f64 {
        self.imaginary_residue
    }

    pub fn entry(&self, a: usize, b: usize) -> &[f64] {
        &self.entries[8 * a + b]
    }

    pub fn at(&self, z: [i64; 3]) -> RealMat8 {
        let idx = self.grid.wrapped_index(z);
        RealMat8::from_fn(|a, b| self.entries[8 * a + b][idx])
    }

    pub fn at_index(&self, idx: usize) -> RealMat8 {
        RealMat8::from_fn(|a, b| self.entries[8 * a + b][idx])
    }

    /// Largest entry of `|self − other|` over the grid.
    pub fn max_abs_diff(&self, other: &PositionTable) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// `𝒫(z) = e^{−m|z|}/(4π|z|)` on the grid, with the singular centre cell
/// replaced by the average of `𝒫` over that cell.
pub fn yukawa_kernel(grid: &GridSpec, mass: f64) -> Vec<f64> {
    let h = grid.spacing();
    let f = |r: f64| (-mass * r).exp() / (4.0 * PI * r);
    let mut out: Vec<f64> =
        (0..grid.len()).map(|idx| grid.radius(idx)).map(|r| if r > 0.0 { f(r) } else { 0.0 }).collect();
    let sub = 40;
    let mut acc = 0.0;
    for a in 0..sub {
        for b in 0..sub {
            for c in 0..sub {
                let p = [a, b, c].map(|i| ((i as f64 + 0.5) / sub as f64 - 0.5) * h);
                acc += f((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt());
            }
        }
    }
    out[0] = acc / (sub * sub * sub) as f64;
    out
}

/// Cross-check route for `q_∞(z)`: `½q₀(z) + ½(𝒫 ∗ R)(z)` with
/// `R = F⁻¹[P(−ik) q̂₀ Pᵀ(ik)]` and the Yukawa potential `𝒫` of [`yukawa_kernel`].
pub fn yukawa_equilibrium_table(symbols: &RealSymbols, q0: &GridSymbol) -> PositionTable {
    let grid = *q0.grid();
    let fft = Fft3::shared(grid.n());
    let r_hat = GridSymbol::full(
        grid,
        (0..grid.len())
            .map(|idx| {
                let p = symbols.symbol_p(&grid.dynamic_wave_vector(idx));
                p * q0.mode(idx) * p.adjoint()
            })
            .collect(),
        f64::INFINITY,
    )
    .expect("table matches grid");
    let r = PositionTable::from_symbol(&r_hat);
    let base = PositionTable::from_symbol(q0);
    let mut y: Vec<Complex64> = yukawa_kernel(&grid, symbols.mass()).iter().map(|v| real(*v)).collect();
    fft.forward(&mut y);
    let h3 = grid.cell_volume();
    let mut entries = Vec::with_capacity(64);
    for e in 0..64 {
        let mut buf: Vec<Complex64> = r.entries[e].iter().map(|v| real(*v)).collect();
        fft.forward(&mut buf);
        buf.iter_mut().zip(&y).for_each(|(a, b)| *a *= b);
        fft.inverse(&mut buf);
        entries.push(base.entries[e].iter().zip(&buf).map(|(q, c)| 0.5 * q + 0.5 * h3 * c.re).collect());
    }
    PositionTable { grid, entries, imaginary_residue: r.imaginary_residue.max(base.imaginary_residue) }
}

/// `𝒬(φ, φ) = (h³/n³) Σ_k ℛφ̂(k)^† q̂(k) ℛφ̂(k)`.
pub fn quadratic_form(phi: &RealField8, symbol: &GridSymbol) -> Result<f64> {
    symbol.grid().ensure_same(phi.grid())?;
    let spec = fft_forward(phi);
    let sum: f64 = (0..phi.grid().len())
        .map(|idx| {
            let v = spec.mode(idx);
            v.dotc(&symbol.apply(idx, &v)).re
        })
        .sum();
    Ok(phi.grid().cell_volume() * sum / phi.grid().len() as f64)
}

fn quadratic_form_with(phi: &RealField8, f: impl Fn(usize, &Vec8) -> Vec8) -> f64 {
    let spec = fft_forward(phi);
    let sum: f64 = (0..phi.grid().len())
        .map(|idx| {
            let v = spec.mode(idx);
            v.dotc(&f(idx, &v)).re
        })
        .sum();
    phi.grid().cell_volume() * sum / phi.grid().len() as f64
}

/// `𝒬_t(φ, φ)`, the variance of `⟨U(t)ψ₀, φ⟩`.
pub fn quadratic_form_t(phi: &RealField8, symbols: &RealSymbols, q0: &GridSymbol, t: f64) -> Result<f64> {
    q0.grid().ensure_same(phi.grid())?;
    let grid = *phi.grid();
    Ok(quadratic_form_with(phi, |idx, v| {
        let g = symbols.propagator(&grid.dynamic_wave_vector(idx), t);
        g * q0.apply(idx, &(g.adjoint() * v))
    }))
}

/// `𝒬_∞(φ, φ)`.
pub fn quadratic_form_inf(phi: &RealField8, symbols: &RealSymbols, q0: &GridSymbol) -> Result<f64> {
    q0.grid().ensure_same(phi.grid())?;
    let grid = *phi.grid();
    Ok(quadratic_form_with(phi, |idx, v| q_hat_inf(symbols, &grid.dynamic_wave_vector(idx), &q0.mode(idx)) * v))
}

/// `max_z |q_t(z) − q_∞(z)|` tabulated over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceProfile {
    pub times: Vec<f64>,
    pub probes: Vec<[i64; 3]>,
    /// `deviation[i][p]`: largest entry of `|q_t(z_p) − q_∞(z_p)|` at `times[i]`.
    pub deviation: Vec<Vec<f64>>,
}

impl ConvergenceProfile {
    /// Maximum over probes at each time.
    pub fn max_over_probes(&self) -> Vec<f64> {
        self.deviation.iter().map(|row| row.iter().cloned().fold(0.0, f64::max)).collect()
    }

    pub fn at_time(&self, t: f64) -> Option<f64> {
        let i = self.times.iter().position(|s| (s - t).abs() < 1e-12)?;
        Some(self.deviation[i].iter().cloned().fold(0.0, f64::max))
    }
}

/// Tabulates `|q_t(z) − q_∞(z)|` at the probes. The oscillating parts `A`, `B`
/// are formed once per mode and accumulated for all times.
pub fn convergence_profile(
    symbols: &RealSymbols,
    q0: &GridSymbol,
    probes: &[[i64; 3]],
    times: &[f64],
) -> ConvergenceProfile {
    let grid = *q0.grid();
    let h = grid.spacing();
    let (nt, np) = (times.len(), probes.len());
    let chunk = 4096;
    let partials: Vec<Vec<f64>> = (0..grid.len())
        .collect::<Vec<_>>()
        .par_chunks(chunk)
        .map(|modes| {
            let mut acc = vec![0.0; nt * np * 64];
            let mut ra = vec![0.0; np * 64];
            let mut rb = vec![0.0; np * 64];
            for &idx in modes {
                let kd = grid.dynamic_wave_vector(idx);
                let k = grid.wave_vector(idx);
                let (_, a, b) = oscillating_parts(symbols, &kd, &q0.mode(idx));
                for (p, z) in probes.iter().enumerate() {
                    let phase = -h * (k[0] * z[0] as f64 + k[1] * z[1] as f64 + k[2] * z[2] as f64);
                    let ph = Complex64::from_polar(1.0, phase);
                    for e in 0..64 {
                        ra[64 * p + e] = (ph * a[(e / 8, e % 8)]).re;
                        rb[64 * p + e] = (ph * b[(e / 8, e % 8)]).re;
                    }
                }
                let two_omega = 2.0 * symbols.dispersion(&kd);
                for (ti, t) in times.iter().enumerate() {
                    let (s, c) = (two_omega * t).sin_cos();
                    let row = &mut acc[ti * np * 64..(ti + 1) * np * 64];
                    for ((r, x), y) in row.iter_mut().zip(&ra).zip(&rb) {
                        *r += c * x + s * y;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; nt * np * 64];
    for part in &partials {
        total.iter_mut().zip(part).for_each(|(t, p)| *t += p);
    }
    let norm = 1.0 / (grid.cell_volume() * grid.len() as f64);
    let deviation = (0..nt)
        .map(|ti| {
            (0..np)
                .map(|p| {
                    total[(ti * np + p) * 64..(ti * np + p + 1) * 64]
                        .iter()
                        .fold(0.0_f64, |m, v| m.max((v * norm).abs()))
                })
                .collect()
        })
        .collect();
    ConvergenceProfile { times: times.to_vec(), probes: probes.to_vec(), deviation }
}

/// Maximum of a sampled curve over dyadic windows `[t₀2ʲ, t₀2ʲ⁺¹)` and the
/// least-squares slope of `log envelope` against `log t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicEnvelope {
    pub window_starts: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
}

impl DyadicEnvelope {
    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }
}

pub fn dyadic_envelope(times: &[f64], values: &[f64], start: f64) -> DyadicEnvelope {
    let last = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut window_starts = Vec::new();
    let mut env = Vec::new();
    let mut lo = start;
    while 2.0 * lo <= last + 1e-12 {
        let m = times
            .iter()
            .zip(values)
            .filter(|(t, _)| **t >= lo - 1e-12 && **t < 2.0 * lo - 1e-12)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        if m.is_finite() {
            window_starts.push(lo);
            env.push(m);
        }
        lo *= 2.0;
    }
    let xs: Vec<f64> = window_starts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = env.iter().map(|v| v.ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    DyadicEnvelope { window_starts, values: env, slope }
}

/// Slope of the least-squares line through `(x, y)`; NaN for fewer than two points.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

const GAUSS_LEGENDRE_8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

/// `(1/T)∫₀ᵀ q̂_t dt` by composite 8-point Gauss–Legendre quadrature, reported
/// at each requested horizon `T` (ascending, each a multiple of `panel`).
///
/// With `Ĝ_t = cos ωt − P sin ωt / ω`, `q̂_t` is `cos²ωt·q̂₀ − (cos ωt sin ωt/ω)(Pq̂₀ + q̂₀P^†)
/// + (sin²ωt/ω²)·Pq̂₀P^†`, so only the three scalar weights are integrated.
pub fn time_average_q_hat(symbols: &RealSymbols, k: &WaveVector, q0: &Mat8, horizons: &[f64], panel: f64) -> Vec<Mat8> {
    let omega = symbols.dispersion(k);
    let p = symbols.symbol_p(k);
    let cross = p * q0 + q0 * p.adjoint();
    let sandwich = p * q0 * p.adjoint();
    let (mut cc, mut cs, mut ss) = (0.0, 0.0, 0.0);
    let mut out = Vec::with_capacity(horizons.len());
    let mut t0 = 0.0;
    for &horizon in horizons {
        let panels = ((horizon - t0) / panel).round() as usize;
        for _ in 0..panels {
            let mid = t0 + 0.5 * panel;
            for &(x, w) in &GAUSS_LEGENDRE_8 {
                for t in [mid - 0.5 * panel * x, mid + 0.5 * panel * x] {
                    let (sn, co) = (omega * t).sin_cos();
                    let w = 0.5 * panel * w;
                    cc += w * co * co;
                    cs += w * co * sn;
                    ss += w * sn * sn;
                }
            }
            t0 += panel;
        }
        let integral = q0 * real(cc) - cross * real(cs / omega) + sandwich * real(ss / (omega * omega));
        out.push(integral / real(horizon));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::max_abs;
    use crate::grid::{unit_weights, TestFunction};
    use crate::measures::SymbolModel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(rng: &mut ChaCha8Rng) -> Mat8 {
        let b = Mat8::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        b * b.adjoint()
    }

    fn random_k(rng: &mut ChaCha8Rng) -> WaveVector {
        WaveVector::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
    }

    #[test]
    fn compact_and_expanded_forms_agree() {
        let s = RealSymbols::new(1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let q = random_psd(&mut rng);
            let k = random_k(&mut rng);
            let t = rng.random_range(-20.0..20.0);
            let a = q_hat_t(&s, &k, t, &q);
            let b = q_hat_t_expanded(&s, &k, t, &q);
            assert!(max_abs(&(a - b)) < 1e-12 * max_abs(&q).max(1.0));
            assert!((a.trace() - q.trace()).norm() < 1e-12 * q.trace().norm());
        }
        let q = random_psd(&mut rng);
        assert!(max_abs(&(q_hat_t(&s, &WaveVector::new(0.3, 0.1, 0.0), 0.0, &q) - q)) < 1e-15);
    }

    #[test]
    fn equilibrium_matches_mean_part_and_is_invariant() {
        let s = RealSymbols::new(0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let q = random_psd(&mut rng);
            let k = random_k(&mut rng);
            let inf = q_hat_inf(&s, &k, &q);
            let (mean, _, _) = oscillating_parts(&s, &k, &q);
            assert!(max_abs(&(inf - mean)) < 1e-12 * max_abs(&q));
            for t in [1.0, 10.0, 100.0] {
                assert!(max_abs(&(q_hat_t(&s, &k, t, &inf) - inf)) < 1e-11 * max_abs(&q));
            }
        }
        let k = WaveVector::new(0.4, -1.0, 2.0);
        assert!(max_abs(&(q_hat_inf(&s, &k, &Mat8::identity()) - Mat8::identity())) < 1e-12);
        assert_eq!(q_hat_inf(&s, &k, &Mat8::zeros()), Mat8::zeros());
    }

    #[test]
    fn quadrature_matches_node_by_node_sum() {
        let s = RealSymbols::new(1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = random_psd(&mut rng);
        let k = WaveVector::new(-1.4, 0.3, 2.2);
        let panel = 0.5;
        let mut direct = Mat8::zeros();
        for i in 0..8 {
            let mid = (i as f64 + 0.5) * panel;
            for &(x, w) in &GAUSS_LEGENDRE_8 {
                for t in [mid - 0.5 * panel * x, mid + 0.5 * panel * x] {
                    direct += q_hat_t(&s, &k, t, &q) * real(0.5 * panel * w);
                }
            }
        }
        let avg = time_average_q_hat(&s, &k, &q, &[4.0], panel);
        assert!(max_abs(&(avg[0] - direct / real(4.0))) < 1e-12 * max_abs(&q));
    }

    #[test]
    fn quadrature_matches_closed_form_average() {
        let s = RealSymbols::new(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_psd(&mut rng);
        let k = WaveVector::new(0.7, -0.2, 1.1);
        let avg = time_average_q_hat(&s, &k, &q, &[5.0, 10.0], 0.25);
        let (mean, a, b) = oscillating_parts(&s, &k, &q);
        let w2 = 2.0 * s.dispersion(&k);
        for (horizon, got) in [5.0, 10.0].iter().zip(&avg) {
            let ca = (w2 * horizon).sin() / (w2 * horizon);
            let cb = (1.0 - (w2 * horizon).cos()) / (w2 * horizon);
            let expect = mean + a * real(ca) + b * real(cb);
            assert!(max_abs(&(got - expect)) < 1e-10 * max_abs(&q));
        }
    }

    #[test]
    fn flat_symbol_position_is_discrete_delta() {
        let g = GridSpec::new(8, 4.0).unwrap();
        let sym = SymbolModel::Flat { amplitude: 2.0 }.on_grid(g).unwrap();
        let entries = q_position(&sym, &[[0, 0, 0], [1, 0, 0], [0, -2, 3]]);
        assert!((entries[0].value[(3, 3)] - 2.0 / g.cell_volume()).abs() < 1e-12);
        assert!(entries[0].value[(3, 4)].abs() < 1e-12);
        assert!(entries[1].value.amax() < 1e-12);
        assert!(entries[2].value.amax() < 1e-12);
        let table = PositionTable::from_symbol(&sym);
        assert!((table.at([0, 0, 0]) - entries[0].value).amax() < 1e-12);
    }

    #[test]
    fn gaussian_position_matches_closed_form() {
        let g = GridSpec::new(32, 16.0).unwrap();
        let model = SymbolModel::GaussianBump { kappa: 1.0, amplitude: 1.0, weights: [1.0; 8] };
        let sym = model.on_grid(g).unwrap();
        let offsets = [[0, 0, 0], [1, 0, 0], [2, 1, 0], [0, 3, 3]];
        for e in q_position(&sym, &offsets) {
            let z = WaveVector::new(e.offset[0] as f64, e.offset[1] as f64, e.offset[2] as f64) * g.spacing();
            let expect = model.continuum_covariance(&z).unwrap()[0];
            assert!((e.value[(0, 0)] - expect).abs() < 1e-10, "{:?}", e.offset);
            assert!(e.imaginary_residue < 1e-12);
        }
    }

    #[test]
    fn quadratic_form_against_double_sum() {
        let g = GridSpec::new(16, 8.0).unwrap();
        let sym = SymbolModel::real_part_bump(1.5, 1.0).on_grid(g).unwrap();
        let phi = TestFunction::bump(g, 2.0, [1.0, 0.0, 0.5, 0.0, 0.3, 0.0, 0.0, 0.0]).field().clone();
        let table = PositionTable::from_symbol(&sym);
        let h6 = g.cell_volume().powi(2);
        let support: Vec<usize> = (0..g.len()).filter(|&i| phi.node_norm(i) > 0.0).collect();
        let mut brute = 0.0;
        for &x in &support {
            let px = phi.value(x);
            let cx = g.coords(x).map(|c| c as i64);
            for &y in &support {
                let py = phi.value(y);
                let cy = g.coords(y).map(|c| c as i64);
                let q = table.at([cx[0] - cy[0], cx[1] - cy[1], cx[2] - cy[2]]);
                for a in 0..8 {
                    for b in 0..8 {
                        brute += px[a] * q[(a, b)] * py[b];
                    }
                }
            }
        }
        brute *= h6;
        let spectral = quadratic_form(&phi, &sym).unwrap();
        assert!((brute - spectral).abs() < 1e-8 * spectral.abs(), "{brute} vs {spectral}");
        assert!((quadratic_form(&phi, &GridSymbol::identity(g)).unwrap() - phi.charge()).abs() < 1e-12);
        assert_eq!(quadratic_form(&RealField8::zeros(g), &sym).unwrap(), 0.0);
    }

    #[test]
    fn quadratic_form_t_interpolates() {
        let g = GridSpec::new(16, 16.0).unwrap();
        let s = RealSymbols::new(1.0).unwrap();
        let q0 = SymbolModel::real_part_bump(1.0, 1.0).on_grid(g).unwrap();
        let phi = TestFunction::bump(g, 2.0, unit_weights(0)).field().clone();
        let q_0 = quadratic_form(&phi, &q0).unwrap();
        assert!((quadratic_form_t(&phi, &s, &q0, 0.0).unwrap() - q_0).abs() < 1e-13 * q_0);
        let inf = quadratic_form_inf(&phi, &s, &q0).unwrap();
        let direct = quadratic_form(&phi, &equilibrium_symbol(&s, &q0)).unwrap();
        assert!((inf - direct).abs() < 1e-12 * inf);
        let t5 = quadratic_form(&phi, &evolved_symbol(&s, &q0, 5.0)).unwrap();
        assert!((quadratic_form_t(&phi, &s, &q0, 5.0).unwrap() - t5).abs() < 1e-12 * t5);
    }

    #[test]
    fn profile_of_equilibrium_is_zero() {
        let g = GridSpec::new(8, 8.0).unwrap();
        let s = RealSymbols::new(1.0).unwrap();
        let q0 = SymbolModel::real_part_bump(1.0, 1.0).on_grid(g).unwrap();
        let qinf = equilibrium_symbol(&s, &q0);
        let prof = convergence_profile(&s, &qinf, &[[0, 0, 0], [1, 0, 0]], &[1.0, 2.0, 5.0]);
        assert!(prof.max_over_probes().iter().all(|v| *v < 1e-14));
    }

    #[test]
    fn profile_matches_direct_difference() {
        let g = GridSpec::new(8, 8.0).unwrap();
        let s = RealSymbols::new(1.0).unwrap();
        let q0 = SymbolModel::real_part_bump(1.0, 1.0).on_grid(g).unwrap();
        let probes = [[0, 0, 0], [1, 2, 0]];
        let prof = convergence_profile(&s, &q0, &probes, &[3.0]);
        let qt = q_position(&evolved_symbol(&s, &q0, 3.0), &probes);
        let qi = q_position(&equilibrium_symbol(&s, &q0), &probes);
        for p in 0..2 {
            let d = (qt[p].value - qi[p].value).amax();
            assert!((prof.deviation[0][p] - d).abs() < 1e-13);
        }
    }

    #[test]
    fn envelope_and_slope() {
        let times: Vec<f64> = (4..=128).map(|i| i as f64 * 0.25).collect();
        let values: Vec<f64> = times.iter().map(|t| t.powf(-1.5) * (1.0 + 0.3 * (5.0 * t).cos())).collect();
        let env = dyadic_envelope(&times, &values, 1.0);
        assert_eq!(env.window_starts, vec![1.0, 2.0, 4.0, 8.0, 16.0]);
        assert!(env.is_nonincreasing());
        assert!((env.slope + 1.5).abs() < 0.1, "{}", env.slope);
        assert!((least_squares_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn yukawa_route_agrees() {
        let g = GridSpec::new(16, 8.0).unwrap();
        let s = RealSymbols::new(1.0).unwrap();
        let q0 = SymbolModel::real_part_bump(1.0, 1.0).on_grid(g).unwrap();
        let spectral = PositionTable::from_symbol(&equilibrium_symbol(&s, &q0));
        let yukawa = yukawa_equilibrium_table(&s, &q0);
        let rel = spectral.max_abs_diff(&yukawa) / spectral.max_abs();
        assert!(rel < 0.02, "{rel}");
        assert!(spectral.imaginary_residue() < 1e-10);
    }
}
