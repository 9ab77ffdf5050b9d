use thiserror::Error;

/// A command failure, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, plans or configs. Exit code 2.
    #[error("{}", chain(.0))]
    Usage(anyhow::Error),
    /// Anything that went wrong after the inputs were accepted. Exit code 1.
    #[error("{}", chain(.0))]
    Runtime(anyhow::Error),
}

/// The error and its causes joined by `: `, skipping causes whose text a
/// previous message already includes.
fn chain(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if out.contains(&msg) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&msg);
    }
    out
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Tag an error with the exit code it should produce.
pub trait Classify<T> {
    fn usage(self) -> Result<T>;
    fn runtime(self) -> Result<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for std::result::Result<T, E> {
    fn usage(self) -> Result<T> {
        self.map_err(|e| CliError::Usage(e.into()))
    }

    fn runtime(self) -> Result<T> {
        self.map_err(|e| CliError::Runtime(e.into()))
    }
}
