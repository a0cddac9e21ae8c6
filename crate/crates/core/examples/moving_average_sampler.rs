//! Finite-range non-Gaussian data: Rademacher noise smoothed by a compact
//! bump. Covariances vanish exactly beyond twice the tap radius.

use dirac_eq::measures::{empirical_covariance, empirical_mean, Kernel, KernelModel};
use dirac_eq::{GridSpec, Sampler};

fn main() -> dirac_eq::Result<()> {
    let grid = GridSpec::new(32, 32.0)?;
    let kernel = Kernel::new(&KernelModel::Bump { radius: 2.0 }, grid)?;
    println!(
        "{} taps, support radius {:.3}, correlation range {:.3}",
        kernel.taps().len(),
        kernel.support_radius(),
        kernel.correlation_range()
    );
    let exact: Vec<_> = [[0, 0, 0], [1, 0, 0], [2, 1, 0], [4, 0, 0]].map(|z| (z, kernel.covariance_at(z))).to_vec();
    let sampler = Sampler::moving_average(kernel, 5);
    let samples: Vec<_> = (0..300).map(|i| sampler.sample(i)).collect();

    let mean = empirical_mean(&samples)?;
    println!("mean of component 0: {:+.2e} ± {:.1e}", mean.mean[0], mean.standard_error[0]);
    let offsets: Vec<_> = exact.iter().map(|(z, _)| *z).collect();
    for (est, (z, q)) in empirical_covariance(&samples, &offsets)?.iter().zip(&exact) {
        println!("z = {z:?}: empirical {:+.4} ± {:.4}, exact {q:+.4}", est.mean[(0, 0)], est.standard_error[(0, 0)]);
    }
    Ok(())
}
