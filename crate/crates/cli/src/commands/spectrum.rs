//! `spectrum`: assemble the second-variation operator at (p, ω), report
//! its low eigenpairs and the constrained coercivity margin.

use std::path::Path;

use crate::config::RunConfig;
use crate::output::{fmt17, write_atomic, CmdError, Csv, Manifest, ManifestScalars, unix_ms};
use kgsim_core::functionals;
use kgsim_core::linearized::HessianOperator;

pub fn run(config: &RunConfig) -> Result<(), CmdError> {
    let started = unix_ms();
    if config.k == 0 {
        return Err(CmdError::Validation("k must be positive".into()));
    }
    let (grid, wave, _omega) = super::resolve_wave(config)?;
    let p = config.p;

    let op = HessianOperator::new(&grid, &wave);
    let report = op.spectrum(&grid, config.k, config.dense_cap)?;
    let constraints = [wave.i_phi(), wave.dx_phi(&grid), wave.big_psi.clone()];
    let margin = op.coercivity_margin(&grid, &constraints, config.dense_cap)?;
    let triple = functionals::conserved(&grid, &wave.state, p)?;

    let dir = Path::new(&config.out_dir);
    let mut values = Csv::new(&["index", "eigenvalue"]);
    for (i, &mu) in report.eigenvalues.iter().enumerate() {
        values.row(&[i.to_string(), fmt17(mu)]);
    }
    write_atomic(&dir.join("eigenvalues.csv"), values.bytes())?;

    let mut header: Vec<String> = vec!["x".into()];
    for i in 0..report.eigenvectors.len() {
        for part in ["u_re", "u_im", "v_re", "v_im"] {
            header.push(format!("mode{i}_{part}"));
        }
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut vectors = Csv::new(&header_refs);
    for (j, &x) in grid.xs().iter().enumerate() {
        let mut cells = vec![fmt17(x)];
        for pair in &report.eigenvectors {
            cells.push(fmt17(pair.u[j].re));
            cells.push(fmt17(pair.u[j].im));
            cells.push(fmt17(pair.v[j].re));
            cells.push(fmt17(pair.v[j].im));
        }
        vectors.row(&cells);
    }
    write_atomic(&dir.join("eigenvectors.csv"), vectors.bytes())?;

    Manifest {
        config: config.clone(),
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        status: "COMPLETED".into(),
        scalars: ManifestScalars {
            omega_c: Some(wave.params.omega_c()),
            phi_l2sq: Some(wave.phi_l2sq(&grid)),
            energy: Some(triple.energy),
            charge: Some(triple.charge),
            momentum: Some(triple.momentum),
            coercivity_margin: Some(margin),
            ..Default::default()
        },
    }
    .write(dir)?;
    Ok(())
}
