//! `groundstate`: build the standing-wave profile at (p, ω) and emit it
//! with its scalar summary.

use std::path::Path;

use crate::config::RunConfig;
use crate::output::{
    fmt17, render_json, write_atomic, CmdError, Manifest, ManifestScalars, unix_ms,
};
use kgsim_core::functionals;

pub fn run(config: &RunConfig) -> Result<(), CmdError> {
    let started = unix_ms();
    let (grid, wave, omega) = super::resolve_wave(config)?;
    let p = config.p;
    let params = wave.params;

    // Stationary equation residual −φ″ + (1−ω²)φ − |φ|^{p−1}φ, sup norm.
    let ddphi = grid.d2x(&wave.phi);
    let residual_sup = wave
        .phi
        .iter()
        .zip(&ddphi)
        .map(|(&f, &dd)| {
            let r = -dd + f * params.m2() - f * f.norm().powf(p - 1.0);
            r.norm()
        })
        .fold(0.0_f64, f64::max);

    let triple = functionals::conserved(&grid, &wave.state, p)?;
    let l2sq = wave.phi_l2sq(&grid);
    let sup = wave.phi.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);

    let dir = Path::new(&config.out_dir);
    let mut csv = crate::output::Csv::new(&["x", "phi", "dphi_domega"]);
    for (j, &x) in grid.xs().iter().enumerate() {
        csv.row(&[
            fmt17(x),
            fmt17(wave.phi[j].re),
            fmt17(wave.dphi_domega[j].re),
        ]);
    }
    write_atomic(&dir.join("profile.csv"), csv.bytes())?;

    let summary = serde_json::json!({
        "p": p,
        "omega": omega,
        "omega_c": params.omega_c(),
        "m2": params.m2(),
        "l2sq": l2sq,
        "sup": sup,
        "residual_sup": residual_sup,
        "energy": triple.energy,
        "charge": triple.charge,
        "momentum": triple.momentum,
    });
    write_atomic(&dir.join("groundstate.json"), render_json(&summary).as_bytes())?;

    Manifest {
        config: config.clone(),
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        status: "COMPLETED".into(),
        scalars: ManifestScalars {
            omega_c: Some(params.omega_c()),
            phi_l2sq: Some(l2sq),
            energy: Some(triple.energy),
            charge: Some(triple.charge),
            momentum: Some(triple.momentum),
            ..Default::default()
        },
    }
    .write(dir)?;
    Ok(())
}
