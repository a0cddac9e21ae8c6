//! `⟨U(t)ψ, φ⟩ = ⟨ψ, U′(t)φ⟩`: projections of an evolved field can be taken
//! against the adjoint-evolved test function instead.

use dirac_eq::grid::inner;
use dirac_eq::measures::{KernelModel, SamplerSpec};
use dirac_eq::{GridSpec, Propagator, Sampler, TestFunction};

fn main() -> dirac_eq::Result<()> {
    let grid = GridSpec::new(32, 32.0)?;
    let prop = Propagator::new(1.0, grid)?;
    let spec = SamplerSpec::FiniteRangeMovingAverage { seed: 11, kernel: KernelModel::Bump { radius: 1.5 } };
    let sampler = Sampler::new(&spec, grid)?;
    let psi = sampler.sample(0);
    let phi = TestFunction::bump(grid, 3.0, [1.0, 0.0, 0.5, 0.0, 0.0, -0.25, 0.0, 0.0]);
    for t in [0.5, 2.0, 6.0] {
        let forward = inner(&prop.evolve_real(&psi, t)?, phi.field())?;
        let adjoint = inner(&psi, &prop.adjoint_evolve(&phi, t)?)?;
        println!("t = {t:>4}: forward {forward:+.12e}  adjoint {adjoint:+.12e}  gap {:.1e}", (forward - adjoint).abs());
    }
    Ok(())
}
