//! Subcommand implementations. Each validates its configuration before
//! touching the filesystem, writes every output atomically, and returns
//! the process exit code.

pub mod evolve;
pub mod groundstate;
pub mod instability;
pub mod spectrum;
pub mod sweep;

use crate::config::RunConfig;
use crate::output::CmdError;
use kgsim_core::ground_state::{build_family, SolitonParams};
use kgsim_core::{Grid64, StandingWave64};

/// Resolves the frequency and builds the grid and the standing wave,
/// mapping every construction failure to a validation error.
pub fn resolve_wave(config: &RunConfig) -> Result<(Grid64, StandingWave64, f64), CmdError> {
    let omega = config.omega.resolve(config.p)?;
    let params = SolitonParams::new(config.p, omega)?;
    let grid = Grid64::new(config.length, config.n)?;
    let wave = build_family(params, &grid)?;
    Ok((grid, wave, omega))
}

/// Optional cell formatting: empty string for a missing value.
pub fn cell(value: Option<f64>) -> String {
    value.map(crate::output::fmt17).unwrap_or_default()
}
