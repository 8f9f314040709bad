use thiserror::Error;

use crate::protocol::ProtocolError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation of U^dagger U from identity {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("state is not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("quadrature did not reach tolerance {tol:.1e} (last change {last_change:.3e} at {panels} panels)")]
    QuadratureStalled { tol: f64, last_change: f64, panels: usize },

    #[error("cutoff limit {limit} reached with trace deficit {deficit:.3e}")]
    CutoffExceeded { limit: usize, deficit: f64 },

    #[error("displacement buffer too small: non-finite matrix element for |alpha| = {alpha_abs}")]
    BufferTooSmall { alpha_abs: f64 },

    #[error("truncation leakage {leakage:.3e} on mode {mode} exceeds {limit:.1e}")]
    Leakage { mode: usize, leakage: f64, limit: f64 },

    #[error("Fock sector too large: {size} basis states (limit {limit})")]
    SectorTooLarge { size: usize, limit: usize },

    #[error("mode positions collide or fall outside 0..{modes}: {positions:?}")]
    PositionCollision { positions: Vec<usize>, modes: usize },

    #[error("no branch unitary for measurement outcome {outcome} (probability {probability:.3e})")]
    BranchMiss { outcome: usize, probability: f64 },

    #[error(transparent)]
    Protocol(#[from] ProtocolError),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
