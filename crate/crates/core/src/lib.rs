//! Numerical laboratory for standing waves of the one-dimensional nonlinear
//! Klein-Gordon equation
//!
//! ```text
//! u_tt − u_xx + u = |u|^{p−1} u,   1 < p < 5,
//! ```
//!
//! on a periodic domain. The crate builds the explicit standing-wave family
//! e^{iωt}φ_ω, evaluates the conserved functionals and their identities,
//! analyzes the linearized operator around the wave (kernel, negative
//! direction, coercivity), evolves the flow with a symplectic splitting,
//! tracks modulation parameters (phase, translation, frequency rescaling),
//! and evaluates the localized virial functional whose growth certifies
//! orbital instability at the critical frequency ω_c = √((p−1)/4).
//!
//! Everything is generic over the scalar type (`scalar::Real`); `f64` is the
//! working precision, with type aliases at the crate root.

pub mod evolver;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod ground_state;
pub mod linearized;
pub mod modulation;
pub mod scalar;
pub mod virial;

use thiserror::Error as ThisError;

/// Unified error type for construction, configuration, and solver failures.
#[derive(Debug, ThisError)]
pub enum Error {
    /// A parameter is outside its mathematical domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The grid cannot represent the requested object.
    #[error("grid configuration rejected: {0}")]
    GridConfig(String),
    /// A constructed profile failed its accuracy contract.
    #[error("profile accuracy check failed: {0}")]
    ProfileAccuracy(String),
    /// An operator was applied to data from a different grid.
    #[error("operand mismatch: {0}")]
    Mismatch(String),
    /// Dense linear algebra exceeded its configured size cap.
    #[error("dense size cap exceeded: {0}")]
    DenseCap(String),
    /// An eigensolver did not produce a usable decomposition.
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),
    /// A nonlinear fit did not converge.
    #[error("fit failure: {0}")]
    FitFailure(String),
}

pub type Result<V> = std::result::Result<V, Error>;

/// Working-precision aliases.
pub type Grid64 = grid::Grid<f64>;
pub type Pair64 = field::Pair<f64>;
pub type PhaseState64 = field::PhaseState<f64>;
pub type SolitonParams64 = ground_state::SolitonParams<f64>;
pub type StandingWave64 = ground_state::StandingWave<f64>;
pub type EvolverConfig64 = evolver::EvolverConfig<f64>;
pub type Trajectory64 = evolver::Trajectory<f64>;
pub type ModulationFit64 = modulation::ModulationFit<f64>;
pub type TrackSeries64 = modulation::TrackSeries<f64>;
pub type CutoffProfile64 = virial::CutoffProfile<f64>;
pub type InstabilityReport64 = virial::InstabilityReport<f64>;
