use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{BackendError, Result};
use crate::request::{GenerationRequest, GenerationResult};
use crate::Backend;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    /// Matched against the request instruction by containment; `None`
    /// matches any request.
    pub key: Option<String>,
    pub response: String,
}

impl ScriptEntry {
    pub fn keyed(key: impl Into<String>, response: impl Into<String>) -> Self {
        ScriptEntry {
            key: Some(key.into()),
            response: response.into(),
        }
    }

    pub fn any(response: impl Into<String>) -> Self {
        ScriptEntry {
            key: None,
            response: response.into(),
        }
    }
}

/// An ordered list of canned responses, stored as `{"entries": [...]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    pub entries: Vec<ScriptEntry>,
}

impl Script {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|source| BackendError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let script: Script = serde_json::from_str(&raw).map_err(|e| BackendError::Script {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        if let Some(i) = script.entries.iter().position(|e| e.response.trim().is_empty()) {
            return Err(BackendError::Script {
                path: path.to_path_buf(),
                reason: format!("entry {i} has an empty response"),
            });
        }
        Ok(script)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self).expect("script serializes");
        json.push('\n');
        std::fs::write(path, json).map_err(|source| BackendError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// The stable part of an instruction used as a script key: a leading
/// `[...]` tag if there is one, otherwise the whole trimmed instruction.
pub fn instruction_key(instruction: &str) -> &str {
    let trimmed = instruction.trim();
    if trimmed.starts_with('[') {
        if let Some(end) = trimmed.find(']') {
            return &trimmed[..=end];
        }
    }
    trimmed
}

/// Replays a [`Script`].
///
/// Each entry is used at most once. A request takes the first unused entry
/// whose key occurs in its instruction; failing that, the first unused
/// entry without a key. Running out is an error.
#[derive(Debug)]
pub struct ScriptedBackend {
    id: String,
    entries: Vec<ScriptEntry>,
    used: Mutex<Vec<bool>>,
}

impl ScriptedBackend {
    pub fn new(script: Script) -> Self {
        let used = vec![false; script.entries.len()];
        ScriptedBackend {
            id: "scripted".into(),
            entries: script.entries,
            used: Mutex::new(used),
        }
    }

    pub fn from_responses<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(Script {
            entries: responses.into_iter().map(ScriptEntry::any).collect(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Script::load(path).map(Self::new)
    }

    pub fn remaining(&self) -> usize {
        self.used.lock().expect("script cursor poisoned").iter().filter(|u| !**u).count()
    }
}

impl Backend for ScriptedBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult> {
        let mut used = self.used.lock().expect("script cursor poisoned");
        let unused = || self.entries.iter().enumerate().filter(|(i, _)| !used[*i]);
        let keyed = unused().find(|(_, e)| e.key.as_deref().is_some_and(|k| request.instruction.contains(k)));
        let pick = keyed.or_else(|| unused().find(|(_, e)| e.key.is_none())).map(|(i, _)| i);
        let Some(i) = pick else {
            return Err(BackendError::ScriptUnderrun {
                instruction: request.instruction.clone(),
            });
        };
        used[i] = true;
        Ok(GenerationResult {
            text: self.entries[i].response.clone(),
            backend_id: self.id.clone(),
            latency_ms: 0,
            truncated: false,
        })
    }
}

/// Passes requests through to another backend and keeps every response as
/// a keyed script entry, so a live run can be replayed offline.
#[derive(Debug)]
pub struct RecordingBackend<B> {
    inner: B,
    recorded: Mutex<Vec<ScriptEntry>>,
}

impl<B: Backend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        RecordingBackend {
            inner,
            recorded: Mutex::new(Vec::new()),
        }
    }

    pub fn script(&self) -> Script {
        Script {
            entries: self.recorded.lock().expect("recording poisoned").clone(),
        }
    }

    pub fn into_inner(self) -> B {
        self.inner
    }
}

impl<B: Backend> Backend for RecordingBackend<B> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult> {
        let result = self.inner.generate(request)?;
        self.recorded
            .lock()
            .expect("recording poisoned")
            .push(ScriptEntry::keyed(instruction_key(&request.instruction), result.text.clone()));
        Ok(result)
    }
}
