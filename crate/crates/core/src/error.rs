use std::path::PathBuf;

use thiserror::Error;

use crate::school::School;

pub type Result<T, E = CoreError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("keyword set `{name}` is invalid: {reason}")]
    InvalidKeywordSet { name: String, reason: String },

    #[error("no framework keyword set for school {0}")]
    MissingFramework(School),

    #[error("agent `{0}` speaks in the transcript but is not in the roster")]
    UnknownSpeaker(String),

    #[error("observation window after debate turn {injection_turn} is empty")]
    EmptyWindow { injection_turn: usize },

    #[error("malformed transcript line {line}: {reason}")]
    Transcript { line: usize, reason: String },

    #[error("ACS input is invalid: {0}")]
    Acs(String),
}
