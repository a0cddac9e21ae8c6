//! The five experiment families behind the subcommands.

use serde_json::json;

use super::config::ExperimentConfig;
use super::report::{FieldDump, Report, Table};
use crate::checks::{
    algebra_checks, fixed_point_checks, propagator_checks, Check, FixedPointSetup, PropagatorCheckSetup,
};
use crate::covariance::{
    convergence_profile, dyadic_envelope, equilibrium_symbol, quadratic_form_inf, quadratic_form_t, PositionTable,
};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, RealField8, TestFunction};
use crate::measures::Sampler;
use crate::propagator::Propagator;
use crate::stats::ensemble::{forward_route_defect, MIN_CUMULANT_SAMPLES};
use crate::stats::{
    char_functional, cumulant_report, decay_probe, room_corridor_decompose, run_ensemble, variance_scaling_report,
    Moments,
};

fn dump(name: String, field: &RealField8) -> FieldDump {
    FieldDump { name, grid: *field.grid(), components: field.components().to_vec() }
}

fn max_abs_time(times: &[f64]) -> f64 {
    times.iter().map(|t| t.abs()).fold(0.0, f64::max)
}

pub fn verify(config: &ExperimentConfig, seed: u64, dump_fields: bool) -> Result<Report> {
    let grid = config.grid_spec()?;
    let cfg = &config.verify;
    if cfg.times.is_empty() {
        return Err(Error::Config("verify.times must not be empty".into()));
    }
    let propagator = Propagator::new(config.mass, grid)?;
    let sampler = Sampler::new(&config.sampler, grid)?;
    let phi = cfg.phi.build(grid)?;
    let cone = TestFunction::truncated_gaussian(grid, cfg.cone_sigma, cfg.cone_floor, [1.0; 8]);
    let reach = cone.radius() + max_abs_time(&cfg.cone_times);
    if reach >= grid.half_period() {
        return Err(Error::WraparoundBudget { required: reach, limit: grid.half_period() });
    }
    let psi = sampler.sample(0);
    let setup = PropagatorCheckSetup {
        times: cfg.times.clone(),
        k_count: cfg.random_k,
        seed,
        cone_sigma: cfg.cone_sigma,
        cone_floor: cfg.cone_floor,
        cone_times: cfg.cone_times.clone(),
        local_radius: cfg.local_radius,
    };
    let mut report = Report::new("verify", seed);
    report.checks = algebra_checks(config.mass, cfg.random_k, seed)?;
    report.checks.extend(propagator_checks(&propagator, &psi, phi.field(), &setup)?);
    report.results = json!({ "mass": config.mass, "grid": { "n": grid.n(), "length": grid.length() } });
    if dump_fields {
        let t = *cfg.times.last().expect("non-empty");
        report.dumps.push(dump("psi0".into(), &psi));
        report.dumps.push(dump(format!("psi_t{t}"), &propagator.evolve_real(&psi, t)?));
    }
    Ok(report)
}

pub fn covariance(config: &ExperimentConfig, seed: u64, dump_fields: bool) -> Result<Report> {
    let grid = config.grid_spec()?;
    let cfg = &config.covariance;
    let times = cfg.times.times()?;
    let propagator = Propagator::new(config.mass, grid)?;
    let q0 = cfg.symbol.on_grid(grid)?;
    let profile = convergence_profile(propagator.symbols(), &q0, &cfg.probes, &times);
    let maxima = profile.max_over_probes();
    let envelope = dyadic_envelope(&times, &maxima, cfg.envelope_start);

    let mut report = Report::new("covariance", seed);
    let at = |t: f64| profile.at_time(t).ok_or_else(|| Error::Config(format!("covariance.times must contain t = {t}")));
    let (early, late) = (at(cfg.drop_from)?, at(cfg.drop_to)?);
    report.checks.push(Check::at_least(
        format!("deviation drop from t = {} to t = {}", cfg.drop_from, cfg.drop_to),
        early / late,
        cfg.min_drop,
    ));
    report.checks.push(Check::holds("dyadic envelope is nonincreasing", envelope.is_nonincreasing()));
    report.checks.push(Check::at_most("envelope log-log slope", envelope.slope, cfg.max_slope));

    let setup = FixedPointSetup {
        mass: config.mass,
        times: cfg.fixed_point_times.clone(),
        k_count: cfg.random_k,
        seed,
        horizons: cfg.horizons.clone(),
        average_k_count: cfg.average_k,
        panel: cfg.panel,
        ratio_range: (cfg.ratio_range[0], cfg.ratio_range[1]),
    };
    let (fixed, errors) = fixed_point_checks(&setup)?;
    report.checks.extend(fixed);

    let mut columns = vec!["t".to_string(), "max_deviation".to_string()];
    columns.extend(cfg.probes.iter().map(|z| format!("probe_{}_{}_{}", z[0], z[1], z[2])));
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut conv = Table::new("convergence", &column_refs);
    for (i, t) in times.iter().enumerate() {
        let mut row = vec![*t, maxima[i]];
        row.extend(&profile.deviation[i]);
        conv.push(row);
    }
    let mut env = Table::new("envelope", &["window_start", "window_end", "envelope", "monotone"]);
    for (i, (s, v)) in envelope.window_starts.iter().zip(&envelope.values).enumerate() {
        let monotone = i == 0 || *v <= envelope.values[i - 1];
        env.push(vec![*s, 2.0 * s, *v, if monotone { 1.0 } else { 0.0 }]);
    }
    let mut avg = Table::new("time_average", &["horizon", "rms_error"]);
    for (h, e) in cfg.horizons.iter().zip(&errors) {
        avg.push(vec![*h, *e]);
    }
    report.tables = vec![conv, env, avg];
    report.results = json!({
        "deviation_at_drop_from": early,
        "deviation_at_drop_to": late,
        "envelope_slope": envelope.slope,
        "time_average_errors": errors,
    });
    if dump_fields {
        let table = PositionTable::from_symbol(&equilibrium_symbol(propagator.symbols(), &q0));
        let components = (0..64).map(|e| table.entry(e / 8, e % 8).to_vec()).collect();
        report.dumps.push(FieldDump { name: "q_inf".into(), grid, components });
    }
    Ok(report)
}

fn build_tests(config: &ExperimentConfig, grid: GridSpec) -> Result<Vec<TestFunction>> {
    if config.ensemble.tests.is_empty() {
        return Err(Error::Config("ensemble.tests must not be empty".into()));
    }
    config.ensemble.tests.iter().map(|t| t.build(grid)).collect()
}

pub fn ensemble(config: &ExperimentConfig, seed: u64, dump_fields: bool) -> Result<Report> {
    let grid = config.grid_spec()?;
    let cfg = &config.ensemble;
    let propagator = Propagator::new(config.mass, grid)?;
    let sampler = Sampler::new(&config.sampler, grid)?;
    let tests = build_tests(config, grid)?;
    let result = run_ensemble(&propagator, &sampler, &tests, &cfg.times, cfg.samples)?;
    let q0 = sampler.exact_covariance();
    let m = cfg.samples;
    let mut report = Report::new("ensemble", seed);

    let spot: Vec<usize> = (0..cfg.spot_checks.min(m)).collect();
    let defect = forward_route_defect(&propagator, &sampler, &tests, &result, &spot)?;
    report.checks.push(Check::at_most("forward and adjoint routes agree", defect, 1e-10));

    let mut cumulants = Table::new(
        "cumulants",
        &[
            "t",
            "phi",
            "mean",
            "mean_se",
            "variance",
            "variance_se",
            "q_t",
            "q_inf",
            "skewness",
            "skewness_se",
            "excess_kurtosis",
            "kurtosis_se",
            "skewness_p",
            "kurtosis_p",
            "ks_statistic",
            "ks_p",
        ],
    );
    let mut chars =
        Table::new("char_functional", &["t", "phi", "lambda", "re", "im", "se", "gaussian_t", "gaussian_inf", "bias"]);
    let t_last = max_abs_time(&cfg.times);
    let mut summaries = Vec::new();
    if m < 2 {
        report.warnings.push(format!("{m} sample: statistics need at least 2"));
    } else if m < MIN_CUMULANT_SAMPLES {
        report.warnings.push(format!("cumulant tests need at least {MIN_CUMULANT_SAMPLES} samples, got {m}"));
    }
    for (fi, phi) in tests.iter().enumerate() {
        let q_inf = quadratic_form_inf(phi.field(), propagator.symbols(), &q0)?;
        for (ti, &t) in cfg.times.iter().enumerate() {
            let values = result.projections(ti, fi);
            let mo = Moments::of(&values);
            let q_t = quadratic_form_t(phi.field(), propagator.symbols(), &q0, t)?;
            summaries.push(json!({ "t": t, "phi": fi, "moments": mo, "q_t": q_t, "q_inf": q_inf }));
            if m < 2 {
                continue;
            }
            let fourth = values.iter().map(|v| (v - mo.mean).powi(4)).sum::<f64>() / m as f64;
            let variance_se = ((fourth - mo.variance.powi(2)).max(0.0) / m as f64).sqrt();
            let label = format!("t = {t}, phi {fi}");
            report.checks.push(Check::at_most(
                format!("mean within {} SE ({label})", cfg.mean_se),
                mo.mean.abs() / mo.mean_standard_error(),
                cfg.mean_se,
            ));
            report.checks.push(Check::at_most(
                format!("variance matches Q_t within {} SE ({label})", cfg.variance_se),
                (mo.variance - q_t).abs() / variance_se,
                cfg.variance_se,
            ));
            let mut row = vec![t, fi as f64, mo.mean, mo.mean_standard_error(), mo.variance, variance_se, q_t, q_inf];
            if m >= MIN_CUMULANT_SAMPLES {
                let c = cumulant_report(&values, q_t)?;
                row.extend([
                    c.moments.skewness,
                    c.skewness_se,
                    c.moments.excess_kurtosis,
                    c.kurtosis_se,
                    c.skewness_p,
                    c.kurtosis_p,
                    c.ks.statistic,
                    c.ks.p_value,
                ]);
                if t.abs() == t_last {
                    report.checks.push(Check::at_most(
                        format!("|skewness| / SE ({label})"),
                        c.skewness_z.abs(),
                        cfg.cumulant_se,
                    ));
                    report.checks.push(Check::at_most(
                        format!("|excess kurtosis| / SE ({label})"),
                        c.kurtosis_z.abs(),
                        cfg.cumulant_se,
                    ));
                }
                if t == 0.0 && cfg.initial_kurtosis_se > 0.0 {
                    report.checks.push(Check::at_least(
                        format!("initial |excess kurtosis| / SE ({label})"),
                        c.kurtosis_z.abs(),
                        cfg.initial_kurtosis_se,
                    ));
                }
            } else {
                row.extend([f64::NAN; 8]);
            }
            cumulants.push(row);
            for est in char_functional(&values, &cfg.lambdas, q_inf)? {
                let l2 = est.lambda * est.lambda;
                let gaussian_t = (-0.5 * l2 * q_t).exp();
                let bias = l2 * (q_t - q_inf).abs();
                chars.push(vec![
                    t,
                    fi as f64,
                    est.lambda,
                    est.re,
                    est.im,
                    est.standard_error,
                    gaussian_t,
                    est.gaussian,
                    bias,
                ]);
                if t.abs() == t_last && m >= MIN_CUMULANT_SAMPLES {
                    let distance = ((est.re - est.gaussian).powi(2) + est.im.powi(2)).sqrt();
                    report.checks.push(Check::at_most(
                        format!("char functional at lambda = {} ({label})", est.lambda),
                        distance,
                        cfg.char_se * est.standard_error + bias,
                    ));
                }
            }
        }
    }
    report.tables = vec![cumulants, chars];
    if cfg.save_projections {
        let mut raw = Table::new("projections", &["sample_id", "t", "phi_id", "value"]);
        for s in 0..m {
            for (ti, &t) in cfg.times.iter().enumerate() {
                for fi in 0..tests.len() {
                    raw.push(vec![s as f64, t, fi as f64, result.value(s, ti, fi)]);
                }
            }
        }
        report.tables.push(raw);
    }
    report.results = json!({ "samples": m, "forward_route_defect": defect, "projections": summaries });
    if dump_fields {
        report.dumps.push(dump("psi0_sample0".into(), &sampler.sample(0)));
        for &t in &cfg.times {
            report.dumps.push(dump(format!("phi0_t{t}"), &propagator.adjoint_evolve(&tests[0], t)?));
        }
    }
    Ok(report)
}

pub fn rooms(config: &ExperimentConfig, seed: u64, dump_fields: bool) -> Result<Report> {
    let grid = config.grid_spec()?;
    let cfg = &config.rooms;
    let propagator = Propagator::new(config.mass, grid)?;
    let sampler = Sampler::new(&config.sampler, grid)?;
    let phi = cfg.phi.build(grid)?;
    let scaling = variance_scaling_report(&propagator, &sampler, &phi, &cfg.times, cfg.delta, cfg.samples)?;

    let mut report = Report::new("rooms", seed);
    let mut residual = 0.0_f64;
    for &t in &cfg.times {
        for s in 0..cfg.reconstruction_samples {
            let d = room_corridor_decompose(&propagator, &sampler.sample(s as u64), &phi, t, cfg.delta)?;
            residual = residual.max(d.residual);
        }
    }
    report.checks.push(Check::at_most("room-corridor reconstruction", residual, 1e-10));
    report.checks.push(Check::at_most("room constant max/min over t", scaling.room_constant_spread(), cfg.max_spread));
    report.checks.push(Check::holds("corridor-to-room ratio decreasing in t", scaling.corridor_ratio_decreasing()));

    let mut table = Table::new(
        "rooms",
        &[
            "t",
            "room_width",
            "corridor_width",
            "slabs",
            "max_room_variance",
            "max_room_variance_exact",
            "max_corridor_variance",
            "max_corridor_variance_exact",
            "room_total",
            "room_total_exact",
            "corridor_total",
            "corridor_total_exact",
            "outside_variance_exact",
            "room_constant",
            "corridor_constant",
            "corridor_to_room",
            "corridor_to_room_exact",
        ],
    );
    for r in &scaling.rows {
        table.push(vec![
            r.t,
            r.room_width,
            r.corridor_width,
            r.slabs as f64,
            r.max_room_variance,
            r.max_room_variance_exact,
            r.max_corridor_variance,
            r.max_corridor_variance_exact,
            r.room_total,
            r.room_total_exact,
            r.corridor_total,
            r.corridor_total_exact,
            r.outside_variance_exact,
            r.room_constant,
            r.corridor_constant,
            r.corridor_to_room,
            r.corridor_to_room_exact,
        ]);
    }
    report.tables = vec![table];
    report.results = json!({ "reconstruction_residual": residual, "scaling": scaling });
    if dump_fields {
        report.dumps.push(dump("psi0_sample0".into(), &sampler.sample(0)));
    }
    Ok(report)
}

pub fn decay(config: &ExperimentConfig, seed: u64, dump_fields: bool) -> Result<Report> {
    let grid = config.grid_spec()?;
    let cfg = &config.decay;
    if cfg.masses.is_empty() {
        return Err(Error::Config("decay.masses must not be empty".into()));
    }
    let phi = cfg.phi.build(grid)?;
    let mut report = Report::new("decay", seed);
    let mut table = Table::new("decay", &["mass", "t", "sup_norm", "fitted", "residual"]);
    let mut exponents = Vec::new();
    let mut fits = Vec::new();
    for &mass in &cfg.masses {
        let propagator = Propagator::new(mass, grid)?;
        let rep = decay_probe(&propagator, &phi, &cfg.times)?;
        for (t, s) in rep.times.iter().zip(&rep.sup_norms) {
            let fitted = if *t > 0.0 { (rep.intercept + rep.exponent * t.ln()).exp() } else { f64::NAN };
            table.push(vec![mass, *t, *s, fitted, s / fitted - 1.0]);
        }
        report.checks.push(Check::within(
            format!("decay exponent (m = {mass})"),
            rep.exponent,
            Some(cfg.expected_exponent - cfg.tolerance),
            Some(cfg.expected_exponent + cfg.tolerance),
        ));
        exponents.push(rep.exponent);
        if dump_fields {
            let t = max_abs_time(&cfg.times);
            report.dumps.push(dump(format!("phi_t{t}_m{mass}"), &propagator.adjoint_evolve(&phi, t)?));
        }
        fits.push(rep);
    }
    let spread =
        exponents.iter().cloned().fold(f64::MIN, f64::max) - exponents.iter().cloned().fold(f64::MAX, f64::min);
    report.checks.push(Check::at_most("exponent spread across masses", spread, cfg.stability));
    report.tables = vec![table];
    report.results = json!({ "fits": fits });
    Ok(report)
}
