//! Batch experiment runner behind the `dirac-eq` binary.
//!
//! ```text
//! dirac-eq <verify|covariance|ensemble|rooms|decay> --config <path>
//!          [--out <dir>] [--seed <u64>] [--threads <n>] [--dump-fields]
//! ```
//!
//! Exit status 0 when every check passes, 1 when a check fails or output
//! cannot be written, 2 when the configuration is invalid.

pub mod config;
pub mod experiments;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};

pub use config::ExperimentConfig;
pub use report::{emit_report, Manifest, Report, Table};

use crate::error::{Error, Result};
use report::{manifest_entries, sha256_hex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Algebra and propagator invariants.
    Verify,
    /// Convergence of q_t to q_inf and the fixed-point checks.
    Covariance,
    /// Monte Carlo projections: moments, cumulants, characteristic functional.
    Ensemble,
    /// Room-corridor decomposition and variance scaling.
    Rooms,
    /// Dispersive decay of the adjoint evolution.
    Decay,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Verify => "verify",
            Experiment::Covariance => "covariance",
            Experiment::Ensemble => "ensemble",
            Experiment::Rooms => "rooms",
            Experiment::Decay => "decay",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dirac-eq", version, about = "Free Dirac dynamics with random initial data: verification experiments")]
pub struct Args {
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// TOML configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sampler seed; overrides `sampler.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write binary field dumps.
    #[arg(long)]
    pub dump_fields: bool,
}

/// Exit status for a failed run: 2 for anything a corrected config would fix,
/// 1 for I/O trouble.
pub fn error_status(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Dump(_) => 1,
        _ => 2,
    }
}

/// Runs one experiment with an already-loaded config; does not write files.
pub fn run_experiment(experiment: Experiment, config: &ExperimentConfig, dump_fields: bool) -> Result<Report> {
    let seed = config.sampler.seed();
    match experiment {
        Experiment::Verify => experiments::verify(config, seed, dump_fields),
        Experiment::Covariance => experiments::covariance(config, seed, dump_fields),
        Experiment::Ensemble => experiments::ensemble(config, seed, dump_fields),
        Experiment::Rooms => experiments::rooms(config, seed, dump_fields),
        Experiment::Decay => experiments::decay(config, seed, dump_fields),
    }
}

/// Loads the config, applies overrides, runs, writes all artifacts and the
/// manifest into the output directory. Returns the report and the directory.
pub fn run(args: &Args) -> Result<(Report, PathBuf)> {
    let start = Instant::now();
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.sampler = config.sampler.with_seed(seed);
    }
    let dump_fields = args.dump_fields || config.output.dump_fields;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let mut report = run_experiment(args.experiment, &config, dump_fields)?;
    let mut files = emit_report(&mut report, &out)?;
    let config_path = out.join("config.toml");
    std::fs::write(&config_path, config.to_toml())?;
    files.push(config_path);
    write_manifest(&report, &config, &out, &files, start)?;
    Ok((report, out))
}

fn write_manifest(
    report: &Report,
    config: &ExperimentConfig,
    out: &Path,
    files: &[PathBuf],
    start: Instant,
) -> Result<()> {
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: report.experiment.clone(),
        seed: report.seed,
        config_sha256: sha256_hex(config.to_toml().as_bytes()),
        threads: rayon::current_num_threads(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        files: manifest_entries(out, files)?,
    };
    std::fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// Parses arguments, runs, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not set thread count: {e}");
        }
    }
    match run(&args) {
        Ok((report, _)) => {
            if report.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_status(&e)
        }
    }
}
