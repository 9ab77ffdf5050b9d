use std::path::PathBuf;

use hde_core::Phase;
use thiserror::Error;

pub type Result<T, E = OrchestratorError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("invalid run config: {0}")]
    Config(String),

    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("run config {path} is not valid TOML: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Identity(#[from] hde_identity::IdentityError),

    #[error(transparent)]
    Tom(#[from] hde_tom::TomError),

    #[error(transparent)]
    Retrieval(#[from] hde_retrieval::RetrievalError),

    #[error(transparent)]
    Backend(#[from] hde_backend::BackendError),

    #[error("{phase} phase called while the debate is in phase {actual}")]
    WrongPhase { phase: Phase, actual: Phase },

    #[error("run aborted in {phase} at turn {turn_index}: {source}")]
    Aborted {
        phase: Phase,
        turn_index: usize,
        #[source]
        source: Box<OrchestratorError>,
    },
}
