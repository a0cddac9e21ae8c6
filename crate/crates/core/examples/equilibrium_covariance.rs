//! `q̂_t → q̂_∞`: position-space deviation over time, its dyadic envelope, and
//! the `O(1/T)` convergence of time averages.

use dirac_eq::checks::{random_wave_vectors, time_average_errors};
use dirac_eq::covariance::{convergence_profile, dyadic_envelope};
use dirac_eq::measures::SymbolModel;
use dirac_eq::{GridSpec, RealSymbols};

fn main() -> dirac_eq::Result<()> {
    let grid = GridSpec::new(64, 64.0)?;
    let symbols = RealSymbols::new(1.0)?;
    let model = SymbolModel::real_part_bump(1.0, 1.0);
    let q0 = model.on_grid(grid)?;
    let times: Vec<f64> = (4..=128).map(|i| i as f64 * 0.25).collect();
    let probes = [[0, 0, 0], [1, 0, 0], [2, 1, 0]];
    let profile = convergence_profile(&symbols, &q0, &probes, &times);
    let dev = profile.max_over_probes();
    for t in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        let i = times.iter().position(|&s| s == t).expect("t on the grid");
        println!("t = {t:>4}: max |q_t − q_∞| = {:.3e}", dev[i]);
    }
    let env = dyadic_envelope(&times, &dev, 1.0);
    println!("envelope {:?}", env.values.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>());
    println!("slope {:.3}, nonincreasing {}", env.slope, env.is_nonincreasing());

    let ks = random_wave_vectors(4096, std::f64::consts::PI, 1);
    let horizons = [25.0, 50.0, 100.0];
    let errors = time_average_errors(&symbols, &model, &ks, &horizons, 0.25);
    for (t, e) in horizons.iter().zip(&errors) {
        println!("T = {t:>5}: rms error of the time average {e:.3e}");
    }
    Ok(())
}
