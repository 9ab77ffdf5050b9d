use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = BackendError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("script exhausted: no entry left for instruction `{instruction}`")]
    ScriptUnderrun { instruction: String },

    #[error("script {path} is invalid: {reason}")]
    Script { path: PathBuf, reason: String },

    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("environment variable {0} holding the API key is not set")]
    MissingApiKey(String),

    #[error("request failed after {attempts} attempts (last status: {}): {message}", .last_status.map_or("none".to_string(), |s| s.to_string()))]
    Exhausted {
        attempts: u32,
        last_status: Option<u16>,
        message: String,
    },

    #[error("endpoint rejected the request with status {status}: {body}")]
    Rejected { status: u16, body: String },

    #[error("malformed completion response: {0}")]
    Malformed(String),

    #[error("backend returned empty text")]
    EmptyResponse,

    #[error("invalid backend configuration: {0}")]
    Config(String),
}
