//! Command-line harness for the heterogeneous debate engine.
//!
//! `hde debate` runs one configured debate; `hde factorial` and `hde
//! ablation` run whole plans and write table-shaped CSV; `hde acs`
//! aggregates learning-outcome records. Every run directory holds
//! `transcript.jsonl`, `audit.jsonl` and `metrics.json`.

pub mod cli;
pub mod error;
pub mod plan;
pub mod run;
pub mod tables;

pub use cli::{execute, Cli, Command};
pub use error::{CliError, Result};
