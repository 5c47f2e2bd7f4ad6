//! `evolve`: integrate the perturbed standing wave (1+a)Φ_ω, track the
//! modulation decomposition along the recorded samples, and emit the
//! combined trajectory table.

use std::path::Path;

use crate::config::RunConfig;
use crate::output::{fmt17, write_atomic, CmdError, Csv, Manifest, ManifestScalars, unix_ms};
use kgsim_core::evolver::{evolve, EvolverConfig, TrajectoryStatus};
use kgsim_core::field::PhaseState;
use kgsim_core::functionals;
use kgsim_core::modulation::track;

pub const TRAJECTORY_HEADER: &[&str] = &[
    "t",
    "charge",
    "momentum",
    "energy",
    "sup_u",
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

pub fn run(config: &RunConfig) -> Result<i32, CmdError> {
    let started = unix_ms();
    if !(config.a.is_finite() && (0.0..=0.05).contains(&config.a)) {
        return Err(CmdError::Validation(format!(
            "perturbation size a must lie in [0, 0.05], got {}",
            config.a
        )));
    }
    let (grid, wave, omega) = super::resolve_wave(config)?;
    let p = config.p;

    let mut cfg = EvolverConfig::new(config.dt, config.t_end);
    cfg.record_every = config.record_every;
    if !cfg.is_valid(0.0) {
        return Err(CmdError::Validation(format!(
            "time stepping rejected: dt {} over [0, {}]",
            config.dt, config.t_end
        )));
    }

    let datum = wave.state.pair().scaled(1.0 + config.a);
    let s0 = PhaseState::new(datum.u, datum.v, 0.0);
    let traj = evolve(&grid, &s0, &cfg, p);
    if traj.samples.is_empty() {
        return Err(CmdError::Internal("stepper produced no samples".into()));
    }
    let series = track(&grid, &traj, p, omega)?;

    let dir = Path::new(&config.out_dir);
    let mut csv = Csv::new(TRAJECTORY_HEADER);
    for (i, sample) in traj.samples.iter().enumerate() {
        let mut cells = vec![
            fmt17(sample.state.t),
            fmt17(sample.conserved.charge),
            fmt17(sample.conserved.momentum),
            fmt17(sample.conserved.energy),
            fmt17(sample.state.sup_u()),
        ];
        if let Some(point) = series.points.get(i) {
            let fit = &point.fit;
            cells.extend([
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
            cells.extend((0..8).map(|_| String::new()));
            cells.push("1".into());
        }
        csv.row(&cells);
    }
    write_atomic(&dir.join("trajectory.csv"), csv.bytes())?;

    if config.gnuplot {
        let script = "set datafile separator ','\n\
                      set key autotitle columnhead\n\
                      plot 'trajectory.csv' using 1:2 with lines, \\\n\
                           '' using 1:4 with lines\n";
        write_atomic(&dir.join("plot.gp"), script.as_bytes())?;
    }

    let wave_triple = functionals::conserved(&grid, &wave.state, p)?;
    let (status, exit_code) = match traj.status {
        TrajectoryStatus::Completed => ("COMPLETED".to_string(), 0),
        TrajectoryStatus::BlownUp(tb) => (format!("BLOWN_UP at t={}", fmt17(tb)), 3),
        TrajectoryStatus::Rejected => {
            return Err(CmdError::Validation("stepper rejected the run".into()))
        }
    };
    Manifest {
        config: config.clone(),
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        status,
        scalars: ManifestScalars {
            omega_c: Some(wave.params.omega_c()),
            phi_l2sq: Some(wave.phi_l2sq(&grid)),
            energy: Some(wave_triple.energy),
            charge: Some(wave_triple.charge),
            momentum: Some(wave_triple.momentum),
            ..Default::default()
        },
    }
    .write(dir)?;
    Ok(exit_code)
}
