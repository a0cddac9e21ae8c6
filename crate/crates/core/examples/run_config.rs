//! Runs an experiment from a TOML file without touching the filesystem,
//! the way the `dirac-eq` binary does before writing its outputs.
//!
//! ```text
//! cargo run --release --example run_config -- examples/configs/verify.toml verify
//! ```

use dirac_eq::cli::{run_experiment, Experiment, ExperimentConfig};

fn main() -> dirac_eq::Result<()> {
    let mut args = std::env::args().skip(1);
    let path =
        args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/verify.toml").into());
    let experiment = match args.next().as_deref() {
        None | Some("verify") => Experiment::Verify,
        Some("covariance") => Experiment::Covariance,
        Some("ensemble") => Experiment::Ensemble,
        Some("rooms") => Experiment::Rooms,
        Some("decay") => Experiment::Decay,
        Some(other) => return Err(dirac_eq::Error::Config(format!("unknown experiment {other}"))),
    };
    let config = ExperimentConfig::load(std::path::Path::new(&path))?;
    let report = run_experiment(experiment, &config, false)?;
    println!("{}", serde_json::to_string_pretty(&report.summary()).expect("summary serializes"));
    Ok(())
}
