//! Room–corridor partition of the `x³` axis.
//!
//! Slab `j` starts at `j·h_t` with a room of width `d_t` followed by a
//! corridor of width `ρ_t`, `h_t = d_t + ρ_t`. The slabs tile the whole torus;
//! those meeting the inflated cone `|x³| ≤ t + r̄` are reported individually
//! and the remainder is lumped into one "outside" term.

use rayon::prelude::*;
use serde::Serialize;

use super::neumaier_sum;
use crate::covariance::quadratic_form;
use crate::error::{Error, Result};
use crate::grid::{inner, GridSpec, RealField8, TestFunction};
use crate::measures::{require_samples, Sampler};
use crate::propagator::Propagator;

pub const DEFAULT_DELTA: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoomCorridorLayout {
    pub t: f64,
    pub delta: f64,
    /// Room width in cells.
    pub room_cells: i64,
    /// Corridor width in cells.
    pub corridor_cells: i64,
    /// First and last slab meeting the cone.
    pub first_slab: i64,
    pub last_slab: i64,
    #[serde(skip)]
    grid: GridSpec,
}

/// Which part of the partition a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Room(i64),
    Corridor(i64),
    Outside,
}

impl RoomCorridorLayout {
    /// `d_t = max(h, t/ln t)` and `ρ_t = max(h, t^{1−δ})`, each rounded to a
    /// whole number of cells; the cone has half-width `t + cone_radius`.
    pub fn new(grid: GridSpec, t: f64, delta: f64, cone_radius: f64) -> Result<Self> {
        if !(t > 1.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("room widths need t > 1, got {t}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
        }
        if !(cone_radius >= 0.0) {
            return Err(Error::InvalidArgument(format!("cone radius must be non-negative, got {cone_radius}")));
        }
        let h = grid.spacing();
        let cells = |w: f64| ((w / h).round() as i64).max(1);
        let room_cells = cells(t / t.ln());
        let corridor_cells = cells(t.powf(1.0 - delta));
        let period = room_cells + corridor_cells;
        let reach = ((t + cone_radius) / h).ceil() as i64;
        let first_slab = (-reach).div_euclid(period);
        let last_slab = reach.div_euclid(period);
        let required = h * (-first_slab * period).max((last_slab + 1) * period) as f64;
        if required > grid.half_period() {
            return Err(Error::LayoutOverflow { required, limit: grid.half_period() });
        }
        Ok(Self { t, delta, room_cells, corridor_cells, first_slab, last_slab, grid })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn room_width(&self) -> f64 {
        self.room_cells as f64 * self.grid.spacing()
    }

    pub fn corridor_width(&self) -> f64 {
        self.corridor_cells as f64 * self.grid.spacing()
    }

    pub fn period(&self) -> f64 {
        self.room_width() + self.corridor_width()
    }

    pub fn slab_count(&self) -> usize {
        (self.last_slab - self.first_slab + 1) as usize
    }

    /// Part containing the plane `x³ = c·h`.
    pub fn part_of_plane(&self, c: i64) -> Part {
        let period = self.room_cells + self.corridor_cells;
        let j = c.div_euclid(period);
        if j < self.first_slab || j > self.last_slab {
            Part::Outside
        } else if c - j * period < self.room_cells {
            Part::Room(j)
        } else {
            Part::Corridor(j)
        }
    }

    pub fn part(&self, idx: usize) -> Part {
        self.part_of_plane(self.grid.centered(self.grid.coords(idx)[2]))
    }

    /// Dense bucket number: rooms and corridors of slab `j` at `2(j − first)`
    /// and `2(j − first) + 1`, the outside at `2·slab_count`.
    pub fn bucket(&self, part: Part) -> usize {
        match part {
            Part::Room(j) => 2 * (j - self.first_slab) as usize,
            Part::Corridor(j) => 2 * (j - self.first_slab) as usize + 1,
            Part::Outside => 2 * self.slab_count(),
        }
    }

    pub fn bucket_count(&self) -> usize {
        2 * self.slab_count() + 1
    }

    /// Splits `field` into its restrictions to every bucket.
    pub fn split(&self, field: &RealField8) -> Vec<RealField8> {
        let buckets: Vec<usize> = (0..self.grid.len()).map(|idx| self.bucket(self.part(idx))).collect();
        (0..self.bucket_count()).map(|b| field.masked(|idx| if buckets[idx] == b { 1.0 } else { 0.0 })).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlabTerm {
    pub j: i64,
    /// `r_tʲ = ⟨ψ₀, χ_rʲ U′(t)φ⟩`
    pub room: f64,
    /// `c_tʲ = ⟨ψ₀, χ_cʲ U′(t)φ⟩`
    pub corridor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub layout: RoomCorridorLayout,
    pub terms: Vec<SlabTerm>,
    /// Contribution of all slabs outside the cone.
    pub outside: f64,
    /// `⟨U(t)ψ₀, φ⟩` by forward evolution.
    pub projection: f64,
    /// `|Σ terms − projection| / |projection|`.
    pub residual: f64,
}

impl Decomposition {
    pub fn sum(&self) -> f64 {
        neumaier_sum(self.terms.iter().flat_map(|s| [s.room, s.corridor]).chain([self.outside]))
    }
}

pub fn room_corridor_decompose(
    propagator: &Propagator,
    psi0: &RealField8,
    phi: &TestFunction,
    t: f64,
    delta: f64,
) -> Result<Decomposition> {
    let grid = *propagator.grid();
    grid.ensure_same(psi0.grid())?;
    grid.ensure_same(phi.grid())?;
    let layout = RoomCorridorLayout::new(grid, t, delta, phi.radius())?;
    let phi_t = propagator.adjoint_evolve(phi, t)?;
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); layout.bucket_count()];
    let h3 = grid.cell_volume();
    for idx in 0..grid.len() {
        let v: f64 = (0..8).map(|a| psi0.component(a)[idx] * phi_t.component(a)[idx]).sum();
        buckets[layout.bucket(layout.part(idx))].push(v * h3);
    }
    let totals: Vec<f64> = buckets.into_iter().map(neumaier_sum).collect();
    let terms = (layout.first_slab..=layout.last_slab)
        .map(|j| SlabTerm {
            j,
            room: totals[layout.bucket(Part::Room(j))],
            corridor: totals[layout.bucket(Part::Corridor(j))],
        })
        .collect();
    let projection = inner(&propagator.evolve_real(psi0, t)?, phi.field())?;
    let mut out =
        Decomposition { layout, terms, outside: totals[layout.bucket(Part::Outside)], projection, residual: 0.0 };
    out.residual = (out.sum() - projection).abs() / projection.abs().max(f64::MIN_POSITIVE);
    Ok(out)
}

/// Second moments of the room, corridor and outside terms at one `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub t: f64,
    pub room_width: f64,
    pub corridor_width: f64,
    pub slabs: usize,
    pub max_room_variance: f64,
    pub max_room_variance_exact: f64,
    pub max_corridor_variance: f64,
    pub max_corridor_variance_exact: f64,
    pub room_total: f64,
    pub room_total_exact: f64,
    pub corridor_total: f64,
    pub corridor_total_exact: f64,
    pub outside_variance_exact: f64,
    /// `max_j E|r_tʲ|² · t / d_t`
    pub room_constant: f64,
    /// `max_j E|c_tʲ|² · t / ρ_t`
    pub corridor_constant: f64,
    /// `Σ_j E|c_tʲ|² / Σ_j E|r_tʲ|²`
    pub corridor_to_room: f64,
    pub corridor_to_room_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceScaling {
    pub samples: usize,
    pub delta: f64,
    pub rows: Vec<ScalingRow>,
}

impl VarianceScaling {
    /// `max / min` of the room constant across the `t` grid.
    pub fn room_constant_spread(&self) -> f64 {
        let c: Vec<f64> = self.rows.iter().map(|r| r.room_constant).collect();
        c.iter().cloned().fold(f64::MIN, f64::max) / c.iter().cloned().fold(f64::MAX, f64::min)
    }

    pub fn corridor_ratio_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].corridor_to_room < w[0].corridor_to_room)
    }
}

/// Empirical (over `samples` draws) and exact second moments of every room
/// and corridor term, for each `t`.
pub fn variance_scaling_report(
    propagator: &Propagator,
    sampler: &Sampler,
    phi: &TestFunction,
    times: &[f64],
    delta: f64,
    samples: usize,
) -> Result<VarianceScaling> {
    require_samples(2, samples)?;
    let grid = *propagator.grid();
    grid.ensure_same(sampler.grid())?;
    grid.ensure_same(phi.grid())?;
    let q0 = sampler.exact_covariance();
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let required = t.abs() + phi.radius() + sampler.correlation_range();
        if required >= grid.half_period() {
            return Err(Error::WraparoundBudget { required, limit: grid.half_period() });
        }
        let layout = RoomCorridorLayout::new(grid, t, delta, phi.radius())?;
        let parts = layout.split(&propagator.adjoint_evolve(phi, t)?);
        let exact = parts.iter().map(|p| quadratic_form(p, &q0)).collect::<Result<Vec<f64>>>()?;
        let pulled = parts.iter().map(|p| sampler.pullback(p)).collect::<Result<Vec<RealField8>>>()?;
        drop(parts);
        let projections: Vec<Vec<f64>> =
            (0..samples as u64).into_par_iter().map(|s| sampler.project(s, &pulled)).collect();
        let empirical: Vec<f64> = (0..layout.bucket_count())
            .map(|b| neumaier_sum(projections.iter().map(|row| row[b] * row[b])) / samples as f64)
            .collect();
        let pick = |values: &[f64], room: bool| -> Vec<f64> {
            (layout.first_slab..=layout.last_slab)
                .map(|j| values[layout.bucket(if room { Part::Room(j) } else { Part::Corridor(j) })])
                .collect()
        };
        let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
        let (rooms, corridors) = (pick(&empirical, true), pick(&empirical, false));
        let (rooms_x, corridors_x) = (pick(&exact, true), pick(&exact, false));
        let room_total = neumaier_sum(rooms.iter().cloned());
        let corridor_total = neumaier_sum(corridors.iter().cloned());
        let room_total_exact = neumaier_sum(rooms_x.iter().cloned());
        let corridor_total_exact = neumaier_sum(corridors_x.iter().cloned());
        rows.push(ScalingRow {
            t,
            room_width: layout.room_width(),
            corridor_width: layout.corridor_width(),
            slabs: layout.slab_count(),
            max_room_variance: max(&rooms),
            max_room_variance_exact: max(&rooms_x),
            max_corridor_variance: max(&corridors),
            max_corridor_variance_exact: max(&corridors_x),
            room_total,
            room_total_exact,
            corridor_total,
            corridor_total_exact,
            outside_variance_exact: exact[layout.bucket(Part::Outside)],
            room_constant: max(&rooms) * t / layout.room_width(),
            corridor_constant: max(&corridors) * t / layout.corridor_width(),
            corridor_to_room: corridor_total / room_total,
            corridor_to_room_exact: corridor_total_exact / room_total_exact,
        });
    }
    Ok(VarianceScaling { samples, delta, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Kernel, KernelModel};

    fn grid() -> GridSpec {
        GridSpec::new(32, 32.0).unwrap()
    }

    #[test]
    fn widths_follow_the_rounded_laws() {
        let g = GridSpec::new(64, 64.0).unwrap();
        let widths: Vec<(i64, i64)> = [4.0, 8.0, 16.0, 24.0]
            .iter()
            .map(|&t| {
                let l = RoomCorridorLayout::new(g, t, 0.9, 1.5).unwrap();
                (l.room_cells, l.corridor_cells)
            })
            .collect();
        assert_eq!(widths, vec![(3, 1), (4, 1), (6, 1), (8, 1)]);
        let wide = RoomCorridorLayout::new(g, 16.0, 0.25, 1.5).unwrap();
        assert_eq!(wide.corridor_cells, 8);
        assert!(RoomCorridorLayout::new(g, 1.0, 0.9, 1.5).is_err());
        assert!(RoomCorridorLayout::new(g, 4.0, 1.0, 1.5).is_err());
        assert!(matches!(RoomCorridorLayout::new(g, 31.0, 0.9, 1.5), Err(Error::LayoutOverflow { .. })));
    }

    #[test]
    fn slabs_partition_every_plane() {
        let l = RoomCorridorLayout::new(grid(), 6.0, 0.5, 2.0).unwrap();
        let mut counts = vec![0; l.bucket_count()];
        for c in -16..16 {
            counts[l.bucket(l.part_of_plane(c))] += 1;
        }
        assert_eq!(counts.iter().sum::<usize>(), 32);
        // every cone slab owns a full room and corridor
        for j in l.first_slab..=l.last_slab {
            assert_eq!(counts[l.bucket(Part::Room(j))] as i64, l.room_cells);
            assert_eq!(counts[l.bucket(Part::Corridor(j))] as i64, l.corridor_cells);
        }
        let f = RealField8::from_fn(grid(), |x| std::array::from_fn(|a| (x[2] + a as f64).cos() + x[0]));
        let parts = l.split(&f);
        let mut sum = RealField8::zeros(grid());
        for p in &parts {
            for a in 0..8 {
                sum.component_mut(a).iter_mut().zip(p.component(a)).for_each(|(s, v)| *s += v);
            }
        }
        assert_eq!(sum.max_abs_diff(&f), 0.0);
    }

    #[test]
    fn decomposition_reconstructs_projection() {
        let g = grid();
        let p = Propagator::new(1.3, g).unwrap();
        let k = Kernel::new(&KernelModel::Bump { radius: 2.0 }, g).unwrap();
        let s = Sampler::moving_average(k, 3);
        let phi = TestFunction::bump(g, 2.5, [0.2, 1.0, 0.0, -0.5, 0.0, 0.3, 0.0, 0.0]);
        for (i, t) in [2.0, 5.5, 9.0].into_iter().enumerate() {
            let d = room_corridor_decompose(&p, &s.sample(i as u64), &phi, t, 0.5).unwrap();
            assert!(d.residual < 1e-10, "t = {t}: {}", d.residual);
            assert_eq!(d.terms.len(), d.layout.slab_count());
        }
    }

    #[test]
    fn field_in_one_room_gives_one_term() {
        let g = grid();
        let p = Propagator::new(1.0, g).unwrap();
        let phi = TestFunction::bump(g, 2.0, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let psi = RealField8::from_fn(g, |x| {
            let on = if x[2] == 0.0 { 1.0 } else { 0.0 };
            std::array::from_fn(|a| on * (x[0] + 0.5 * a as f64).cos())
        });
        let d = room_corridor_decompose(&p, &psi, &phi, 3.0, 0.5).unwrap();
        for s in &d.terms {
            let expected_room = if s.j == 0 { d.projection } else { 0.0 };
            assert_eq!(s.corridor, 0.0);
            assert!((s.room - expected_room).abs() <= 1e-12 * d.projection.abs());
        }
        assert_eq!(d.outside, 0.0);
    }

    #[test]
    fn empirical_room_variances_track_exact_ones() {
        let g = grid();
        let p = Propagator::new(1.0, g).unwrap();
        let k = Kernel::new(&KernelModel::Bump { radius: 1.5 }, g).unwrap();
        let s = Sampler::moving_average(k, 9);
        let phi = TestFunction::bump(g, 1.5, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let rep = variance_scaling_report(&p, &s, &phi, &[4.0, 8.0], 0.9, 1200).unwrap();
        for r in &rep.rows {
            // relative SE of a second moment ≈ √(2/M) ≈ 0.04
            assert!((r.room_total / r.room_total_exact - 1.0).abs() < 0.2, "{r:?}");
            assert!(r.outside_variance_exact < 0.02 * r.room_total_exact, "{r:?}");
        }
        assert!(rep.room_constant_spread() >= 1.0);
    }
}
