use serde::{Deserialize, Serialize};

pub const DEFAULT_TEMPERATURE: f64 = 0.2;
pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 400;

/// A prior turn as shown to the model, e.g. `kant (team A)` and its text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledTurn {
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub system_prompt: String,
    /// Oldest first.
    pub context_window: Vec<LabeledTurn>,
    pub instruction: String,
    pub max_output_tokens: u32,
    pub temperature: f64,
}

impl GenerationRequest {
    pub fn new(system_prompt: impl Into<String>, instruction: impl Into<String>) -> Self {
        GenerationRequest {
            system_prompt: system_prompt.into(),
            context_window: Vec::new(),
            instruction: instruction.into(),
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            temperature: DEFAULT_TEMPERATURE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub text: String,
    pub backend_id: String,
    pub latency_ms: u64,
    pub truncated: bool,
}
