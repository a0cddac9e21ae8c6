//! End-to-end acceptance suite. Each test prints one `PASS`/`FAIL` line with
//! its measured runtime. Tests take a shared lock so the runtimes are not
//! inflated by each other.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use dirac_eq::checks::{
    algebra_checks, fixed_point_checks, propagator_checks, Check, FixedPointSetup, PropagatorCheckSetup,
};
use dirac_eq::cli::{run_experiment, Experiment, ExperimentConfig};
use dirac_eq::clifford::RealMat8;
use dirac_eq::covariance::{convergence_profile, dyadic_envelope, PositionTable};
use dirac_eq::measures::{CovarianceAccumulator, CovarianceEstimate, Kernel, KernelModel, SymbolModel};
use dirac_eq::stats::Moments;
use dirac_eq::{GridSpec, Propagator, Sampler, TestFunction};

static SERIAL: Mutex<()> = Mutex::new(());

fn criterion(number: u32, title: &str, budget_seconds: u64, run: impl FnOnce() -> Vec<Check>) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let checks = run();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_seconds);
    for c in &checks {
        println!("    [{}] {} = {:.6e}", if c.passed { "ok" } else { "FAIL" }, c.name, c.value);
    }
    let passed = !checks.is_empty() && checks.iter().all(|c| c.passed) && elapsed <= budget;
    // Bypasses libtest capture so the verdict appears in the plain test log.
    let _ = writeln!(
        std::io::stdout(),
        "criterion {number}: {} {title} ({:.1} s of {budget_seconds} s)",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert!(failed.is_empty(), "criterion {number} failed checks: {failed:?}");
    assert!(elapsed <= budget, "criterion {number} took {elapsed:?}, budget {budget:?}");
}

fn experiment(kind: Experiment, toml: &str) -> Vec<Check> {
    let config = ExperimentConfig::from_toml(toml).expect("acceptance config parses");
    run_experiment(kind, &config, false).expect("experiment runs").checks
}

#[test]
fn criterion_1_algebra() {
    criterion(1, "Clifford and symbol relations over 1000 random k", 1, || algebra_checks(1.0, 1000, 1).unwrap());
}

#[test]
fn criterion_2_propagator() {
    criterion(2, "propagator invariants on a 64^3 grid", 60, || {
        let grid = GridSpec::new(64, 64.0).unwrap();
        let prop = Propagator::new(1.0, grid).unwrap();
        let sampler = Sampler::moving_average(Kernel::new(&KernelModel::Bump { radius: 3.0 }, grid).unwrap(), 1);
        let psi = sampler.sample(0);
        let phi = TestFunction::bump(grid, 3.0, [1.0, 0.0, 0.5, 0.0, 0.0, -0.5, 0.0, 1.0]);
        let setup = PropagatorCheckSetup {
            times: vec![0.5, 3.7, 17.3],
            k_count: 1000,
            seed: 1,
            cone_sigma: 2.0,
            cone_floor: 1e-9,
            cone_times: vec![2.0, 4.0, 8.0],
            local_radius: 8.0,
        };
        propagator_checks(&prop, &psi, phi.field(), &setup).unwrap()
    });
}

#[test]
fn criterion_3_fixed_point_and_time_average() {
    criterion(3, "equilibrium fixed point and O(1/T) time averages", 60, || {
        let setup = FixedPointSetup {
            mass: 1.0,
            times: vec![1.0, 10.0, 100.0],
            k_count: 1000,
            seed: 1,
            horizons: vec![25.0, 50.0, 100.0],
            average_k_count: 4096,
            panel: 0.25,
            ratio_range: (1.6, 2.4),
        };
        fixed_point_checks(&setup).unwrap().0
    });
}

#[test]
fn criterion_4_covariance_convergence() {
    criterion(4, "position-space covariance converges with a decreasing envelope", 120, || {
        let grid = GridSpec::new(64, 64.0).unwrap();
        let prop = Propagator::new(1.0, grid).unwrap();
        let q0 = SymbolModel::real_part_bump(1.0, 1.0).on_grid(grid).unwrap();
        let probes = ExperimentConfig::default().covariance.probes;
        let times: Vec<f64> = (4..=128).map(|i| i as f64 * 0.25).collect();
        let profile = convergence_profile(prop.symbols(), &q0, &probes, &times);
        let envelope = dyadic_envelope(&times, &profile.max_over_probes(), 1.0);
        vec![
            Check::at_least(
                "deviation drop from t = 2 to t = 20",
                profile.at_time(2.0).unwrap() / profile.at_time(20.0).unwrap(),
                10.0,
            ),
            Check::holds("dyadic envelope is nonincreasing", envelope.is_nonincreasing()),
            Check::at_most("envelope log-log slope", envelope.slope, -1.2),
        ]
    });
}

#[test]
fn criterion_5_central_limit() {
    criterion(5, "moving-average projections become Gaussian by t = 24", 20 * 60, || {
        let checks = experiment(
            Experiment::Ensemble,
            r#"
            [grid]
            n = 64
            length = 64.0
            [sampler]
            kind = "finite_range_moving_average"
            seed = 2024
            kernel = { shape = "bump", radius = 1.5 }
            [ensemble]
            samples = 10000
            times = [0.0, 24.0]
            tests = [{ shape = "bump", radius = 1.5 }]
            lambdas = [0.5, 1.0, 2.0]
            cumulant_se = 4.0
            initial_kurtosis_se = 6.0
            char_se = 3.0
            "#,
        );
        for key in [
            "|skewness| / SE (t = 24",
            "|excess kurtosis| / SE (t = 24",
            "initial |excess kurtosis| / SE (t = 0",
            "char functional at lambda = 2 ",
        ] {
            assert!(checks.iter().any(|c| c.name.starts_with(key)), "missing check {key}");
        }
        checks
    });
}

#[test]
fn criterion_6_room_corridor() {
    criterion(6, "room-corridor reconstruction and variance scaling", 15 * 60, || {
        experiment(
            Experiment::Rooms,
            r#"
            [grid]
            n = 64
            length = 64.0
            [sampler]
            kind = "finite_range_moving_average"
            seed = 7
            kernel = { shape = "bump", radius = 3.0 }
            [rooms]
            samples = 1000
            times = [4.0, 8.0, 16.0, 24.0]
            phi = { shape = "bump", radius = 1.5 }
            max_spread = 4.0
            "#,
        )
    });
}

#[test]
fn criterion_7_dispersive_decay() {
    criterion(7, "sup-norm decay exponent near -3/2 for two masses", 10 * 60, || {
        experiment(
            Experiment::Decay,
            r#"
            [grid]
            n = 128
            length = 128.0
            [decay]
            times = [8.0, 12.0, 16.0, 20.0, 24.0, 32.0, 40.0, 48.0]
            masses = [1.0, 2.0]
            phi = { shape = "bump", radius = 4.0 }
            expected_exponent = -1.5
            tolerance = 0.15
            stability = 0.1
            "#,
        )
    });
}

fn sampler_checks(label: &str, sampler: &Sampler, exact: impl Fn([i64; 3]) -> RealMat8, samples: u64) -> Vec<Check> {
    let grid = *sampler.grid();
    let step = (sampler.correlation_range() / grid.spacing()).floor() as i64 + 1;
    let near: Vec<[i64; 3]> = (0..20).map(|i| [i % 4, (i / 4) % 3, i / 12]).collect();
    let far: Vec<[i64; 3]> = [[1, 0, 0], [0, 1, 0], [1, 1, 0], [1, 1, 1], [2, 1, 0]]
        .iter()
        .map(|d| d.map(|x| x * step))
        .filter(|z| ((z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) as f64).sqrt() < grid.half_period())
        .collect();
    let offsets: Vec<_> = near.iter().chain(&far).copied().collect();
    let mut acc = CovarianceAccumulator::new(grid, &offsets);
    let mut averages: Vec<Vec<f64>> = (0..8).map(|_| Vec::with_capacity(samples as usize)).collect();
    let mut kept = Vec::new();
    for i in 0..samples {
        let f = sampler.sample(i);
        acc.add(&f).unwrap();
        for (j, avg) in averages.iter_mut().enumerate() {
            avg.push(f.component(j).iter().sum::<f64>() / grid.len() as f64);
        }
        if i % 500 == 0 {
            kept.push((i, f));
        }
    }
    let estimates = acc.finish().unwrap();

    let mean_z = averages
        .iter()
        .map(|v| {
            let m = Moments::of(v);
            m.mean.abs() / m.mean_standard_error()
        })
        .fold(0.0, f64::max);

    let z_score =
        |est: &CovarianceEstimate, q: RealMat8| (est.mean - q).zip_map(&est.standard_error, |d, se| d.abs() / se).max();
    let near_z = estimates[..near.len()].iter().map(|e| z_score(e, exact(e.offset))).fold(0.0, f64::max);
    let far_z = estimates[near.len()..].iter().map(|e| z_score(e, RealMat8::zeros())).fold(0.0, f64::max);

    let rebuilt = sampler.with_seed(sampler.seed());
    let deterministic = kept.iter().all(|(i, f)| rebuilt.sample(*i) == *f);
    let reseeded = sampler.with_seed(sampler.seed() + 1).sample(0) != kept[0].1;

    vec![
        Check::at_most(format!("{label}: max |mean| / SE"), mean_z, 4.0),
        Check::at_most(format!("{label}: covariance z-score over {} offsets", near.len()), near_z, 5.0),
        Check::at_most(
            format!("{label}: z-score against zero beyond {step} cells ({} offsets)", far.len()),
            far_z,
            5.0,
        ),
        Check::holds(format!("{label}: bitwise seed determinism"), deterministic && reseeded),
    ]
}

#[test]
fn criterion_8_samplers() {
    criterion(8, "sampler means, covariances, finite range and determinism", 5 * 60, || {
        let grid = GridSpec::new(32, 32.0).unwrap();
        let kernel = Kernel::new(&KernelModel::Bump { radius: 3.0 }, grid).unwrap();
        let range = kernel.correlation_range();
        for i in -8..=8_i64 {
            for j in -8..=8_i64 {
                for l in -8..=8_i64 {
                    if (((i * i + j * j + l * l) as f64).sqrt()) > range {
                        assert_eq!(kernel.covariance_at([i, j, l]), 0.0, "offset beyond the moving-average range");
                    }
                }
            }
        }
        let moving = Sampler::moving_average(kernel.clone(), 8);
        let mut checks =
            sampler_checks("moving average", &moving, |z| RealMat8::identity() * kernel.covariance_at(z), 2000);

        let gaussian = Sampler::gaussian(SymbolModel::default().on_grid(grid).unwrap(), 9).unwrap();
        let table = PositionTable::from_symbol(&gaussian.exact_covariance());
        checks.extend(sampler_checks("gaussian", &gaussian, |z| table.at(z), 2000));
        checks
    });
}
