use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = IdentityError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum IdentityError {
    #[error("failed to read identity file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("identity file {path} does not match the schema: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("invalid field `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("edge {edge} references missing node id `{missing}`")]
    DanglingEdge { edge: usize, missing: String },

    #[error("memory entry text is empty")]
    EmptyEntry,

    #[error("working memory capacity must be positive")]
    ZeroCapacity,

    #[error("{core} core entries do not fit in a working memory of capacity {capacity}")]
    CoreOverflow { core: usize, capacity: usize },
}

impl IdentityError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        IdentityError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
