//! The contract between the debate loop and whatever produces text.
//!
//! A [`Backend`] turns a [`GenerationRequest`] into a [`GenerationResult`].
//! [`ScriptedBackend`] replays canned responses and makes every run
//! reproducible offline; [`RemoteBackend`] speaks the common chat-completions
//! HTTP shape. [`assemble_prompt`] builds requests from an agent's identity,
//! filtered working memory and opponent-model hints.

mod audit;
mod error;
mod prompt;
mod remote;
mod request;
mod scripted;

pub use audit::{AuditLog, AuditRecord};
pub use error::{BackendError, Result};
pub use prompt::{assemble_prompt, turn_label, DEFAULT_WINDOW};
pub use remote::{RemoteBackend, RemoteConfig};
pub use request::{
    GenerationRequest, GenerationResult, LabeledTurn, DEFAULT_MAX_OUTPUT_TOKENS, DEFAULT_TEMPERATURE,
};
pub use scripted::{instruction_key, RecordingBackend, Script, ScriptEntry, ScriptedBackend};

/// A text generator. Implementations must tolerate concurrent calls.
pub trait Backend: Send + Sync {
    fn id(&self) -> &str;
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult> {
        (**self).generate(request)
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult> {
        (**self).generate(request)
    }
}
