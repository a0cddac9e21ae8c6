//! Splits a projection into room and corridor contributions and shows how
//! their variances scale with time.

use dirac_eq::measures::{Kernel, KernelModel};
use dirac_eq::stats::{room_corridor_decompose, variance_scaling_report};
use dirac_eq::{GridSpec, Propagator, Sampler, TestFunction};

fn main() -> dirac_eq::Result<()> {
    let grid = GridSpec::new(64, 64.0)?;
    let prop = Propagator::new(1.0, grid)?;
    let sampler = Sampler::moving_average(Kernel::new(&KernelModel::Bump { radius: 1.5 }, grid)?, 7);
    let phi = TestFunction::bump(grid, 1.5, dirac_eq::grid::unit_weights(0));
    let delta = 0.9;

    let d = room_corridor_decompose(&prop, &sampler.sample(0), &phi, 16.0, delta)?;
    println!(
        "t = 16: rooms {} wide, corridors {} wide, {} slabs, reconstruction residual {:.1e}",
        d.layout.room_width(),
        d.layout.corridor_width(),
        d.terms.len(),
        d.residual
    );

    let report = variance_scaling_report(&prop, &sampler, &phi, &[4.0, 8.0, 16.0], delta, 200)?;
    println!("{:>4} {:>14} {:>14} {:>16}", "t", "max E|r|^2", "E|r|^2 t/d_t", "corridor/room");
    for row in &report.rows {
        println!(
            "{:>4} {:>14.4e} {:>14.4e} {:>16.4e}",
            row.t, row.max_room_variance, row.room_constant, row.corridor_to_room
        );
    }
    println!("room constant spread {:.3}", report.room_constant_spread());
    Ok(())
}
