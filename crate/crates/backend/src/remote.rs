use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{BackendError, Result};
use crate::request::{GenerationRequest, GenerationResult};
use crate::Backend;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    /// Full chat-completions URL.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding a bearer token; no auth header if unset.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout_s")]
    pub timeout_s: u64,
    /// Requests per minute; unlimited if absent.
    #[serde(default)]
    pub rpm_cap: Option<u32>,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    /// First retry delay; doubles each further attempt.
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
}

fn default_timeout_s() -> u64 {
    60
}

fn default_attempts() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    1000
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key_env: None,
            timeout_s: default_timeout_s(),
            rpm_cap: None,
            max_attempts: default_attempts(),
            backoff_base_ms: default_backoff_ms(),
        }
    }
}

/// Chat-completions client (`POST {endpoint}` with `model`, `messages`,
/// `max_tokens`, `temperature`).
///
/// Connection failures, timeouts, 429 and 5xx responses are retried with
/// exponential backoff; other 4xx responses fail at once.
#[derive(Debug)]
pub struct RemoteBackend {
    id: String,
    config: RemoteConfig,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
    last_request: Mutex<Option<Instant>>,
}

enum Attempt {
    Done(GenerationResult),
    Retry { status: Option<u16>, message: String },
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self> {
        if config.max_attempts == 0 {
            return Err(BackendError::Config("max_attempts must be at least 1".into()));
        }
        if config.rpm_cap == Some(0) {
            return Err(BackendError::Config("rpm_cap must be positive".into()));
        }
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| BackendError::MissingApiKey(var.clone()))?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_s))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(RemoteBackend {
            id: format!("remote:{}", config.model),
            config,
            api_key,
            client,
            last_request: Mutex::new(None),
        })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn body(&self, request: &GenerationRequest) -> serde_json::Value {
        let mut messages = vec![json!({"role": "system", "content": request.system_prompt})];
        for turn in &request.context_window {
            messages.push(json!({"role": "user", "content": format!("{}: {}", turn.label, turn.text)}));
        }
        messages.push(json!({"role": "user", "content": request.instruction}));
        json!({
            "model": self.config.model,
            "messages": messages,
            "max_tokens": request.max_output_tokens,
            "temperature": request.temperature,
        })
    }

    fn throttle(&self) {
        let Some(rpm) = self.config.rpm_cap else {
            return;
        };
        let gap = Duration::from_secs(60) / rpm;
        let mut last = self.last_request.lock().expect("rate limiter poisoned");
        if let Some(prev) = *last {
            let since = prev.elapsed();
            if since < gap {
                std::thread::sleep(gap - since);
            }
        }
        *last = Some(Instant::now());
    }

    fn attempt(&self, body: &serde_json::Value) -> Result<Attempt> {
        self.throttle();
        let started = Instant::now();
        let mut call = self.client.post(&self.config.endpoint).json(body);
        if let Some(key) = &self.api_key {
            call = call.bearer_auth(key);
        }
        let response = match call.send() {
            Ok(r) => r,
            Err(e) if e.is_connect() || e.is_timeout() || e.is_request() => {
                return Ok(Attempt::Retry {
                    status: None,
                    message: e.to_string(),
                })
            }
            Err(e) => return Err(BackendError::Malformed(e.to_string())),
        };
        let status = response.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Ok(Attempt::Retry {
                status: Some(status.as_u16()),
                message: response.text().unwrap_or_default(),
            });
        }
        if !status.is_success() {
            return Err(BackendError::Rejected {
                status: status.as_u16(),
                body: response.text().unwrap_or_default(),
            });
        }
        let payload: serde_json::Value = match response.json() {
            Ok(v) => v,
            Err(e) if e.is_timeout() => {
                return Ok(Attempt::Retry {
                    status: Some(status.as_u16()),
                    message: e.to_string(),
                })
            }
            Err(e) => return Err(BackendError::Malformed(e.to_string())),
        };
        let latency_ms = started.elapsed().as_millis() as u64;
        let choice = payload
            .get("choices")
            .and_then(|c| c.get(0))
            .ok_or_else(|| BackendError::Malformed("no choices".into()))?;
        let text = choice
            .pointer("/message/content")
            .and_then(|c| c.as_str())
            .ok_or_else(|| BackendError::Malformed("choice has no message content".into()))?
            .trim()
            .to_string();
        if text.is_empty() {
            return Err(BackendError::EmptyResponse);
        }
        let truncated = choice.get("finish_reason").and_then(|f| f.as_str()) == Some("length");
        Ok(Attempt::Done(GenerationResult {
            text,
            backend_id: self.id.clone(),
            latency_ms,
            truncated,
        }))
    }
}

impl Backend for RemoteBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult> {
        let body = self.body(request);
        let mut last_status = None;
        let mut message = String::new();
        for attempt in 1..=self.config.max_attempts {
            if attempt > 1 {
                let delay = Duration::from_millis(self.config.backoff_base_ms) * 2u32.pow(attempt - 2);
                tracing::warn!(attempt, ?last_status, ?delay, "retrying completion request");
                std::thread::sleep(delay);
            }
            match self.attempt(&body)? {
                Attempt::Done(result) => return Ok(result),
                Attempt::Retry { status, message: m } => {
                    last_status = status;
                    message = m;
                }
            }
        }
        Err(BackendError::Exhausted {
            attempts: self.config.max_attempts,
            last_status,
            message,
        })
    }
}
