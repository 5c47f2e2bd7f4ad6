//! `sweep`: run the escape experiment over a Cartesian parameter grid,
//! one output directory per run plus a summary table. Runs execute in
//! parallel up to the configured bound; the summary row order follows the
//! grid order regardless of completion order.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{OmegaSpec, SweepConfig};
use crate::output::{fmt17, write_atomic, CmdError, Csv};
use kgsim_core::ground_state::critical_frequency;

pub const SUMMARY_HEADER: &[&str] = &["p", "omega_ratio", "a", "status", "t_star", "min_slope"];

struct RowResult {
    p: f64,
    omega_ratio: f64,
    a: f64,
    status: String,
    t_star: Option<f64>,
    min_slope: Option<f64>,
}

pub fn run(sweep: &SweepConfig) -> Result<(), CmdError> {
    let root = PathBuf::from(&sweep.base.out_dir);

    // Grid order is the nesting of the three lists as given.
    let mut configs: Vec<(usize, f64, f64, f64)> = Vec::new();
    for &p in &sweep.p_grid {
        for &ratio in &sweep.omega_ratio {
            for &a in &sweep.a_grid {
                configs.push((configs.len(), p, ratio, a));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep.parallelism)
        .build()
        .map_err(|e| CmdError::Internal(format!("thread pool: {e}")))?;

    let rows: Vec<RowResult> = pool.install(|| {
        configs
            .par_iter()
            .map(|&(idx, p, ratio, a)| one_run(sweep, &root, idx, p, ratio, a))
            .collect()
    });

    let mut csv = Csv::new(SUMMARY_HEADER);
    for row in &rows {
        csv.row(&[
            fmt17(row.p),
            fmt17(row.omega_ratio),
            fmt17(row.a),
            row.status.clone(),
            super::cell(row.t_star),
            super::cell(row.min_slope),
        ]);
    }
    write_atomic(&root.join("summary.csv"), csv.bytes())?;
    Ok(())
}

/// One grid point: builds the per-run configuration, runs the experiment
/// into its own directory, and never propagates the failure (the row
/// records it and the sweep continues).
fn one_run(sweep: &SweepConfig, root: &Path, idx: usize, p: f64, ratio: f64, a: f64) -> RowResult {
    let dir = root.join(format!("run_{idx:03}"));
    let outcome = critical_frequency(p)
        .map_err(CmdError::from)
        .and_then(|omega_c| {
            let mut config = sweep.base.clone();
            config.command = "instability".into();
            config.p = p;
            config.omega = OmegaSpec::Value(ratio * omega_c);
            config.a = a;
            config.out_dir = dir.display().to_string();
            super::instability::run_into(&config, &dir)
        });
    match outcome {
        Ok(report) => RowResult {
            p,
            omega_ratio: ratio,
            a,
            status: report.status.as_str().into(),
            t_star: report.t_star,
            min_slope: report.min_slope,
        },
        Err(err) => {
            let _ = std::fs::create_dir_all(&dir);
            let _ = write_atomic(&dir.join("error.txt"), err.message().as_bytes());
            RowResult {
                p,
                omega_ratio: ratio,
                a,
                status: "FAILED".into(),
                t_star: None,
                min_slope: None,
            }
        }
    }
}
