//! Compactly supported moving-average kernels `a(v) = b(v)·I` on the grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::symbol::GridSymbol;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, RealField8};

fn default_radius() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelModel {
    /// Single tap at the origin: i.i.d. ±1 values at every node.
    Delta,
    /// `(1 − |v|²/r_a²)²` for `|v| < r_a` (a C¹ bump), normalised to `Σ b² = 1`.
    Bump {
        #[serde(default = "default_radius")]
        radius: f64,
    },
}

impl Default for KernelModel {
    fn default() -> Self {
        KernelModel::Bump { radius: default_radius() }
    }
}

/// Kernel taps `(offset in cells, weight)`, with `Σ weight² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    grid: GridSpec,
    taps: Vec<([i64; 3], f64)>,
}

impl Kernel {
    pub fn new(model: &KernelModel, grid: GridSpec) -> Result<Self> {
        let taps = match *model {
            KernelModel::Delta => vec![([0, 0, 0], 1.0)],
            KernelModel::Bump { radius } => {
                if !(radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidArgument(format!("kernel radius must be positive, got {radius}")));
                }
                let limit = grid.length() / 4.0;
                if radius > limit {
                    return Err(Error::KernelTooWide { radius, limit });
                }
                let h = grid.spacing();
                let reach = (radius / h).ceil() as i64;
                let mut taps = Vec::new();
                for a in -reach..=reach {
                    for b in -reach..=reach {
                        for c in -reach..=reach {
                            let r2 = ((a * a + b * b + c * c) as f64) * h * h / (radius * radius);
                            if r2 < 1.0 {
                                taps.push(([a, b, c], (1.0 - r2).powi(2)));
                            }
                        }
                    }
                }
                let norm = taps.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
                taps.iter_mut().for_each(|(_, w)| *w /= norm);
                taps
            }
        };
        Ok(Self { grid, taps })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn taps(&self) -> &[([i64; 3], f64)] {
        &self.taps
    }

    /// Largest physical tap distance `max |v|`.
    pub fn support_radius(&self) -> f64 {
        let h = self.grid.spacing();
        self.taps.iter().map(|(v, _)| h * ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) as f64).sqrt()).fold(0.0, f64::max)
    }

    /// Support radius of `q₀(z) = Σ_v a(v)aᵀ(v − z)`.
    pub fn correlation_range(&self) -> f64 {
        2.0 * self.support_radius()
    }

    /// `ψ(x) = Σ_v b(v) ξ(x − v)` on the torus.
    pub fn apply(&self, noise: &RealField8) -> RealField8 {
        self.shift_sum(noise, 1)
    }

    /// Transpose of [`apply`](Self::apply): `(Kᵀφ)(y) = Σ_v b(v) φ(y + v)`.
    pub fn transpose_apply(&self, field: &RealField8) -> RealField8 {
        self.shift_sum(field, -1)
    }

    fn shift_sum(&self, src: &RealField8, sign: i64) -> RealField8 {
        let grid = *src.grid();
        let n = grid.n();
        let mut out = RealField8::zeros(grid);
        for j in 0..8 {
            let s = src.component(j);
            let o = out.component_mut(j);
            for &(v, w) in &self.taps {
                // out(x) += w · s(x − sign·v)
                let sh = v.map(|c| (-sign * c).rem_euclid(n as i64) as usize);
                for i in 0..n {
                    let si = (i + sh[0]) % n;
                    for jj in 0..n {
                        let sj = (jj + sh[1]) % n;
                        let orow = &mut o[(i * n + jj) * n..(i * n + jj + 1) * n];
                        let srow = &s[(si * n + sj) * n..(si * n + sj + 1) * n];
                        let split = n - sh[2];
                        for (a, b) in orow[..split].iter_mut().zip(&srow[sh[2]..]) {
                            *a += w * b;
                        }
                        for (a, b) in orow[split..].iter_mut().zip(&srow[..sh[2]]) {
                            *a += w * b;
                        }
                    }
                }
            }
        }
        out
    }

    /// `b̂(k) = Σ_v b(v) e^{ik·hv}` at mode `idx`.
    pub fn transform(&self, idx: usize) -> Complex64 {
        let k = self.grid.wave_vector(idx);
        let h = self.grid.spacing();
        self.taps
            .iter()
            .map(|(v, w)| {
                let phase = h * (k[0] * v[0] as f64 + k[1] * v[1] as f64 + k[2] * v[2] as f64);
                Complex64::from_polar(*w, phase)
            })
            .sum()
    }

    /// `q̂₀(k) = h³ |b̂(k)|² I`, the symbol of the moving-average field.
    pub fn covariance_symbol(&self) -> GridSymbol {
        let h3 = self.grid.cell_volume();
        let values = (0..self.grid.len()).map(|idx| [h3 * self.transform(idx).norm_sqr(); 8]).collect();
        GridSymbol::diagonal(self.grid, values, self.correlation_range()).expect("table matches grid")
    }

    /// Position-space covariance `q₀(z) = Σ_v b(v) b(v − z)` (times I) at a cell offset.
    pub fn covariance_at(&self, z: [i64; 3]) -> f64 {
        self.taps
            .iter()
            .filter_map(|(v, w)| {
                let u = [v[0] - z[0], v[1] - z[1], v[2] - z[2]];
                self.taps.iter().find(|(t, _)| *t == u).map(|(_, x)| w * x)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::inner;

    fn grid() -> GridSpec {
        GridSpec::new(16, 16.0).unwrap()
    }

    #[test]
    fn tap_counts_and_normalisation() {
        let k = Kernel::new(&KernelModel::Bump { radius: 1.5 }, grid()).unwrap();
        assert_eq!(k.taps().len(), 19);
        let norm: f64 = k.taps().iter().map(|(_, w)| w * w).sum();
        assert!((norm - 1.0).abs() < 1e-15);
        assert!((k.support_radius() - 2f64.sqrt()).abs() < 1e-15);
        let d = Kernel::new(&KernelModel::Delta, grid()).unwrap();
        assert_eq!(d.correlation_range(), 0.0);
        assert!(matches!(Kernel::new(&KernelModel::Bump { radius: 4.5 }, grid()), Err(Error::KernelTooWide { .. })));
    }

    #[test]
    fn apply_moves_a_point() {
        let g = grid();
        let k = Kernel::new(&KernelModel::Bump { radius: 1.5 }, g).unwrap();
        let mut xi = RealField8::zeros(g);
        xi.component_mut(2)[g.wrapped_index([0, 0, -1])] = 1.0;
        let out = k.apply(&xi);
        for &(v, w) in k.taps() {
            let x = g.wrapped_index([v[0], v[1], v[2] - 1]);
            assert!((out.component(2)[x] - w).abs() < 1e-15);
        }
        assert_eq!(out.component(1).iter().map(|v| v.abs()).sum::<f64>(), 0.0);
    }

    #[test]
    fn transpose_is_adjoint() {
        let g = grid();
        let k = Kernel::new(&KernelModel::Bump { radius: 2.5 }, g).unwrap();
        let a = RealField8::from_fn(g, |x| std::array::from_fn(|j| (x[0] * 0.3 + j as f64).sin() * x[2].cos()));
        let b = RealField8::from_fn(g, |x| std::array::from_fn(|j| (x[1] - 0.7 * j as f64).cos() + x[0]));
        let lhs = inner(&k.apply(&a), &b).unwrap();
        let rhs = inner(&a, &k.transpose_apply(&b)).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs());
    }

    #[test]
    fn symbol_matches_position_covariance() {
        let g = grid();
        let k = Kernel::new(&KernelModel::Bump { radius: 2.0 }, g).unwrap();
        let s = k.covariance_symbol();
        // Σ_z q₀(z) = (Σ_v b(v))²
        let total: f64 = k.taps().iter().map(|(_, w)| w).sum::<f64>().powi(2);
        assert!((s.mode(0)[(0, 0)].re / g.cell_volume() - total).abs() < 1e-12);
        assert!((k.covariance_at([0, 0, 0]) - 1.0).abs() < 1e-15);
        assert!((s.trace_integral() - 8.0).abs() < 1e-12);
        assert_eq!(k.covariance_at([5, 0, 0]), 0.0);
        assert!((k.covariance_at([1, 0, 0]) - k.covariance_at([-1, 0, 0])).abs() < 1e-16);
    }
}
