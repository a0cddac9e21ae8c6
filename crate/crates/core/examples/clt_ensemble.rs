//! A small Monte Carlo ensemble: projections of evolved moving-average data
//! lose their initial kurtosis and approach `N(0, Q_t)`.

use dirac_eq::covariance::quadratic_form_t;
use dirac_eq::measures::{Kernel, KernelModel};
use dirac_eq::stats::{char_functional, cumulant_report, run_ensemble};
use dirac_eq::{GridSpec, Propagator, Sampler, TestFunction};

fn main() -> dirac_eq::Result<()> {
    let grid = GridSpec::new(32, 32.0)?;
    let prop = Propagator::new(1.0, grid)?;
    let kernel = Kernel::new(&KernelModel::Bump { radius: 1.5 }, grid)?;
    let q0 = kernel.covariance_symbol();
    let sampler = Sampler::moving_average(kernel, 2024);
    let phi = TestFunction::bump(grid, 1.5, dirac_eq::grid::unit_weights(0));
    let times = [0.0, 8.0];
    let result = run_ensemble(&prop, &sampler, std::slice::from_ref(&phi), &times, 2000)?;
    for (ti, &t) in times.iter().enumerate() {
        let values = result.projections(ti, 0);
        let q_t = quadratic_form_t(phi.field(), prop.symbols(), &q0, t)?;
        let r = cumulant_report(&values, q_t)?;
        println!(
            "t = {t}: var {:.4e} (Q_t {q_t:.4e}), skew z {:+.2}, kurt z {:+.2}, KS p {:.3}",
            r.moments.variance, r.skewness_z, r.kurtosis_z, r.ks.p_value
        );
        for c in char_functional(&values, &[1.0], q_t)? {
            println!("    E e^{{iλX}} at λ = 1: {:+.4} ± {:.4} vs Gaussian {:.4}", c.re, c.standard_error, c.gaussian);
        }
    }
    Ok(())
}
