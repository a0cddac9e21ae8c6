//! Evolves a Gaussian packet with `U(t)` and watches the charge stay fixed
//! while the support grows no faster than the light cone.

use dirac_eq::grid::unit_weights;
use dirac_eq::propagator::{charge_defect, support_radius};
use dirac_eq::{GridSpec, Propagator, TestFunction};

fn main() -> dirac_eq::Result<()> {
    let grid = GridSpec::new(64, 64.0)?;
    let prop = Propagator::new(1.0, grid)?;
    let packet = TestFunction::truncated_gaussian(grid, 2.0, 1e-12, unit_weights(0));
    let psi0 = packet.field().clone();
    let floor = 1e-9;
    let r0 = support_radius(&psi0, floor);
    println!("initial support radius {r0:.3}");
    println!("{:>6} {:>14} {:>12} {:>12}", "t", "charge defect", "support", "cone");
    for t in [1.0, 2.0, 4.0, 8.0, 12.0] {
        let psi = prop.evolve_real(&psi0, t)?;
        println!(
            "{t:>6.1} {:>14.3e} {:>12.3} {:>12.3}",
            charge_defect(&psi0, &psi),
            support_radius(&psi, floor),
            r0 + t
        );
    }
    Ok(())
}
