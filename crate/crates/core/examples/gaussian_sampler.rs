//! Draws Gaussian fields with a prescribed spectral covariance and compares
//! the empirical covariance with the exact one at a few offsets.

use dirac_eq::measures::{empirical_covariance, SamplerSpec, SymbolModel};
use dirac_eq::{GridSpec, Sampler, WaveVector};

fn main() -> dirac_eq::Result<()> {
    let grid = GridSpec::new(32, 32.0)?;
    let model = SymbolModel::real_part_bump(1.0, 1.0);
    let sampler = Sampler::new(&SamplerSpec::GaussianSpectral { seed: 3, symbol: model.clone() }, grid)?;
    let samples: Vec<_> = (0..200).map(|i| sampler.sample(i)).collect();
    let offsets = [[0, 0, 0], [1, 0, 0], [0, 2, 0], [3, 0, 0]];
    for est in empirical_covariance(&samples, &offsets)? {
        let z = est.offset;
        let x = WaveVector::new(z[0] as f64, z[1] as f64, z[2] as f64) * grid.spacing();
        let exact = model.continuum_covariance(&x).map_or(f64::NAN, |d| d[0]);
        println!(
            "z = {z:?}: q_00 empirical {:+.4} ± {:.4}, continuum {:+.4}",
            est.mean[(0, 0)],
            est.standard_error[(0, 0)],
            exact
        );
    }
    Ok(())
}
