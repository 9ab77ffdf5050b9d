//! The debate state machine.
//!
//! A run goes through three phases: teams deliberate internally, a Socratic
//! moderator questions each agent, then the teams debate for a fixed number
//! of alternating speaker turns. Scheduled perturbations are injected as
//! moderator turns during the debate. With a scripted backend a run is a
//! pure function of its config and script.

mod cast;
mod config;
mod engine;
mod error;
mod perturbation;
mod state;

pub use cast::{load_index, Cast, Participant};
pub use config::{
    AgentBinding, BackendConfig, BackendKind, Modules, Preset, RunConfig, TeamConfig, DEFAULT_DEBATE_LENGTH,
    DEFAULT_DELIBERATION_ROUNDS, DEFAULT_DILEMMA,
};
pub use engine::{run_full_pipeline, stage, write_transcript, Engine, RunFailure, RunOutcome};
pub use error::{OrchestratorError, Result};
pub use perturbation::{PerturbationId, PerturbationSpec, ScheduledPerturbation, P1_TEXT, P2_TEXT, P3_TEXT};
pub use state::{transcript_hash, DebateState};
