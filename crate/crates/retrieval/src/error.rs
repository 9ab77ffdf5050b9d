use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = RetrievalError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("source {path} is empty")]
    EmptySource { path: PathBuf },

    #[error("source {path} is not valid UTF-8 at byte offset {offset}")]
    Encoding { path: PathBuf, offset: usize },

    #[error("unknown corpus id `{0}` in retrieval scope")]
    UnknownCorpus(String),

    #[error("retrieval scope is empty")]
    EmptyScope,

    #[error("k must be at least 1")]
    ZeroK,

    #[error("corpus manifest {path} is invalid: {reason}")]
    Manifest { path: PathBuf, reason: String },

    #[error("corpus files not found: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingSources(Vec<PathBuf>),

    #[error("index cache {path} is unreadable: {reason}")]
    Cache { path: PathBuf, reason: String },
}
