//! Harness for the recovery toolkit: reproducible channel sweeps, random
//! inequality verification, and single-shot correction demos.
//!
//! Reproducibility contract: every random draw comes from `ChaCha12Rng`
//! seeded with the run's 64-bit seed; sweeps split one stream per
//! (grid point, trial) via `set_stream((point << 32) | trial)`, so rows are
//! identical whether points run serially or in parallel, and two runs with
//! the same configuration produce byte-identical reports.

pub mod demo;
pub mod statespec;
pub mod sweep;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid state spec `{spec}`: {reason}")]
    BadStateSpec { spec: String, reason: String },
    #[error("invalid sweep config: {0}")]
    BadConfig(String),
    #[error("channel family `{family}` requires a qubit input (dim Q = 2), got {dim}")]
    QubitFamilyDim { family: String, dim: usize },
    #[error(transparent)]
    Channel(#[from] qrecover_core::channels::ChannelError),
    #[error(transparent)]
    State(#[from] qrecover_core::states::StateError),
    #[error(transparent)]
    Measure(#[from] qrecover_core::measures::MeasureError),
    #[error(transparent)]
    Recovery(#[from] qrecover_core::recovery::RecoveryError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("report serialization failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv write failed: {0}")]
    Csv(#[from] csv::Error),
}
