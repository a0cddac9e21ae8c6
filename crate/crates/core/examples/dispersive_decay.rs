//! The adjoint evolution of a smooth test function decays like `t^{-3/2}`.

use dirac_eq::stats::decay_probe;
use dirac_eq::{GridSpec, Propagator, TestFunction};

fn main() -> dirac_eq::Result<()> {
    let grid = GridSpec::new(64, 64.0)?;
    let phi = TestFunction::bump(grid, 4.0, dirac_eq::grid::unit_weights(0));
    let times = [4.0, 6.0, 8.0, 12.0, 16.0, 20.0, 24.0];
    for mass in [1.0, 2.0] {
        let prop = Propagator::new(mass, grid)?;
        let r = decay_probe(&prop, &phi, &times)?;
        println!("m = {mass}: fitted exponent {:.3} over t ≥ {}", r.exponent, r.fit_start);
        for (t, s) in r.times.iter().zip(&r.sup_norms) {
            println!("    t = {t:>4}: sup |U'(t)φ| = {s:.4e}");
        }
    }
    Ok(())
}
