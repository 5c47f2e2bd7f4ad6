//! `instability`: run the escape experiment at (p, ω, a), emit the virial
//! time series and the report. The slope diagnostics are only meaningful
//! before the escape time, so the report states that window explicitly.

use std::path::Path;

use crate::config::RunConfig;
use crate::output::{
    config_hash, fmt17, render_json, write_atomic, CmdError, Csv, Manifest, ManifestScalars,
    unix_ms,
};
use kgsim_core::evolver::{EvolverConfig, TrajectoryStatus};
use kgsim_core::ground_state::{build_family, SolitonParams};
use kgsim_core::virial::instability_experiment;
use kgsim_core::{Grid64, InstabilityReport64};

pub const TIMESERIES_HEADER: &[&str] = &[
    "t",
    "i",
    "i_dot_numeric",
    "i_dot_analytic",
    "tail",
    "kinetic_term",
    "distance",
    "theta",
    "y",
    "lambda",
    "xi_h1l2",
    "eta_minus_i_omega_xi_l2",
    "F1",
    "F2",
    "F3",
    "exit_flag",
];

/// Runs the experiment and writes report.json, timeseries.csv and the
/// manifest into `dir`. Returns the report for the caller's exit code
/// and summary rows.
pub fn run_into(config: &RunConfig, dir: &Path) -> Result<InstabilityReport64, CmdError> {
    let started = unix_ms();
    let omega = config.omega.resolve(config.p)?;
    let grid = Grid64::new(config.length, config.n)?;
    let mut cfg = EvolverConfig::new(config.dt, config.t_end);
    cfg.record_every = config.record_every;
    if !cfg.is_valid(0.0) {
        return Err(CmdError::Validation(format!(
            "time stepping rejected: dt {} over [0, {}]",
            config.dt, config.t_end
        )));
    }

    let report = instability_experiment(&grid, config.p, omega, config.a, &cfg, config.r)?;

    let mut csv = Csv::new(TIMESERIES_HEADER);
    for (i, rec) in report.records.iter().enumerate() {
        let mut cells = vec![
            fmt17(rec.t),
            fmt17(rec.i),
            fmt17(rec.i_dot_numeric),
            super::cell(rec.i_dot_analytic),
            fmt17(rec.tail),
            fmt17(rec.kinetic_term),
        ];
        if let Some(point) = report.track.points.get(i) {
            let fit = &point.fit;
            cells.extend([
                fmt17(point.distance),
                fmt17(fit.theta),
                fmt17(fit.y),
                fmt17(fit.lambda),
                fmt17(fit.xi_h1l2),
                fmt17(fit.eta_minus_i_lambda_omega_xi_l2),
                fmt17(fit.residuals[0]),
                fmt17(fit.residuals[1]),
                fmt17(fit.residuals[2]),
                "0".into(),
            ]);
        } else {
            cells.extend((0..9).map(|_| String::new()));
            cells.push("1".into());
        }
        csv.row(&cells);
    }
    write_atomic(&dir.join("timeseries.csv"), csv.bytes())?;

    // Slope prediction for the dilation datum, linear in a; only defined
    // at the critical frequency.
    let params = SolitonParams::new(config.p, omega)?;
    let wave = build_family(params, &grid)?;
    let l2sq = wave.phi_l2sq(&grid);
    let at_critical = (omega.abs() - params.omega_c()).abs() <= 1e-12;
    let predicted = at_critical.then(|| 4.0 * params.m2() * config.a * l2sq);
    let window_t_max = report.t_star.unwrap_or(config.t_end);

    let value = serde_json::json!({
        "status": report.status.as_str(),
        "p": report.p,
        "omega": report.omega,
        "a": report.a,
        "R": report.r,
        "t_star": opt(report.t_star),
        "cause": report.cause.map(|c| c.as_str()),
        "min_slope": opt(report.min_slope),
        "slope_window_t_max": window_t_max,
        "predicted_initial_slope": opt(predicted),
        "initial_distance": report.initial_distance,
        "escape_threshold": report.escape_threshold,
        "max_distance": report.max_distance,
        "config_hash": config_hash(config),
    });
    write_atomic(&dir.join("report.json"), render_json(&value).as_bytes())?;

    if config.gnuplot {
        let script = "set datafile separator ','\n\
                      set key autotitle columnhead\n\
                      set logscale y\n\
                      plot 'timeseries.csv' using 1:2 with lines, \\\n\
                           '' using 1:7 with lines\n";
        write_atomic(&dir.join("plot.gp"), script.as_bytes())?;
    }

    let wave_triple = kgsim_core::functionals::conserved(&grid, &wave.state, config.p)?;
    Manifest {
        config: config.clone(),
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        status: report.status.as_str().into(),
        scalars: ManifestScalars {
            omega_c: Some(params.omega_c()),
            phi_l2sq: Some(l2sq),
            energy: Some(wave_triple.energy),
            charge: Some(wave_triple.charge),
            momentum: Some(wave_triple.momentum),
            t_star: report.t_star,
            min_slope: report.min_slope,
            ..Default::default()
        },
    }
    .write(dir)?;
    Ok(report)
}

fn opt(value: Option<f64>) -> serde_json::Value {
    match value {
        Some(x) => serde_json::json!(x),
        None => serde_json::Value::Null,
    }
}

pub fn run(config: &RunConfig) -> Result<i32, CmdError> {
    let report = run_into(config, Path::new(&config.out_dir))?;
    Ok(match report.trajectory_status {
        TrajectoryStatus::BlownUp(_) => 3,
        _ => 0,
    })
}
