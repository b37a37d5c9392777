//! Minimal OpenAI-compatible chat-completion client with bounded retries.

use std::time::Duration;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TEMPERATURE: f64 = 0.7;
pub const DEFAULT_API_KEY_ENV: &str = "SYMPLANNER_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RemoteError {
    #[error("chat request needs at least one message")]
    EmptyMessages,
    #[error("no endpoint configured")]
    NoEndpoint,
    #[error("request timed out")]
    Timeout,
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    MalformedJson(String),
    #[error("transport error: {0}")]
    Transport(String),
}

impl RemoteError {
    fn retryable(&self) -> bool {
        match self {
            Self::Timeout | Self::Transport(_) | Self::MalformedJson(_) => true,
            Self::Status { status, .. } => *status == 429 || *status >= 500,
            Self::EmptyMessages | Self::NoEndpoint => false,
        }
    }
}

/// Endpoint and sampling configuration.
///
/// The API key is read from the environment variable named by
/// `api_key_env` at request time and never stored or logged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub base_url: String,
    pub api_key_env: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: f64,
    pub retries: u32,
    pub backoff_ms: u64,
    /// Retries for unparseable discriminator replies before falling back to
    /// a tie.
    pub disc_retries: u32,
    /// Ask the model to parse action text the rule-based parser rejects.
    pub llm_parse_fallback: bool,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            model: "gpt-4.1".into(),
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: 512,
            timeout_secs: 60.0,
            retries: 3,
            backoff_ms: 500,
            disc_retries: 2,
            llm_parse_fallback: false,
        }
    }
}

impl RemoteConfig {
    /// Overrides from `SYMPLANNER_BASE_URL`, `SYMPLANNER_MODEL`,
    /// `SYMPLANNER_TEMPERATURE`, `SYMPLANNER_MAX_TOKENS`,
    /// `SYMPLANNER_TIMEOUT_SECS` and `SYMPLANNER_RETRIES`.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        if let Some(v) = var("SYMPLANNER_BASE_URL") {
            cfg.base_url = v;
        }
        if let Some(v) = var("SYMPLANNER_MODEL") {
            cfg.model = v;
        }
        if let Some(v) = var("SYMPLANNER_TEMPERATURE").and_then(|v| v.parse().ok()) {
            cfg.temperature = v;
        }
        if let Some(v) = var("SYMPLANNER_MAX_TOKENS").and_then(|v| v.parse().ok()) {
            cfg.max_tokens = v;
        }
        if let Some(v) = var("SYMPLANNER_TIMEOUT_SECS").and_then(|v| v.parse().ok()) {
            cfg.timeout_secs = v;
        }
        if let Some(v) = var("SYMPLANNER_RETRIES").and_then(|v| v.parse().ok()) {
            cfg.retries = v;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: "system".into(),
            content: content.into(),
        }
    }
}

/// Per-call sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChatParams {
    pub temperature: f64,
    pub max_tokens: u32,
}

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Debug, Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

pub struct ChatClient {
    cfg: RemoteConfig,
    http: reqwest::blocking::Client,
}

impl std::fmt::Debug for ChatClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChatClient")
            .field("base_url", &self.cfg.base_url)
            .field("model", &self.cfg.model)
            .finish()
    }
}

impl ChatClient {
    pub fn new(cfg: RemoteConfig) -> Result<Self, RemoteError> {
        if cfg.base_url.trim().is_empty() {
            return Err(RemoteError::NoEndpoint);
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_secs.max(0.001)))
            .build()
            .map_err(|e| RemoteError::Transport(e.to_string()))?;
        Ok(Self { cfg, http })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.cfg
    }

    pub fn default_params(&self) -> ChatParams {
        ChatParams {
            temperature: self.cfg.temperature,
            max_tokens: self.cfg.max_tokens,
        }
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'))
    }

    /// The request body as sent on the wire.
    pub fn request_body(&self, messages: &[ChatMessage], params: &ChatParams) -> serde_json::Value {
        serde_json::to_value(ChatRequest {
            model: &self.cfg.model,
            messages,
            temperature: params.temperature,
            max_tokens: params.max_tokens,
        })
        .expect("request serializes")
    }

    fn once(&self, body: &serde_json::Value) -> Result<String, RemoteError> {
        let mut req = self.http.post(self.endpoint()).json(body);
        if let Ok(key) = std::env::var(&self.cfg.api_key_env) {
            if !key.is_empty() {
                req = req.bearer_auth(key);
            }
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                RemoteError::Timeout
            } else {
                RemoteError::Transport(e.to_string())
            }
        })?;
        let status = resp.status();
        let text = resp.text().map_err(|e| {
            if e.is_timeout() {
                RemoteError::Timeout
            } else {
                RemoteError::Transport(e.to_string())
            }
        })?;
        if !status.is_success() {
            return Err(RemoteError::Status {
                status: status.as_u16(),
                body: text.chars().take(500).collect(),
            });
        }
        let parsed: ChatResponse =
            serde_json::from_str(&text).map_err(|e| RemoteError::MalformedJson(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| RemoteError::MalformedJson("no choices[0].message.content".into()))
    }

    /// Sends one chat completion and returns the first choice's text,
    /// retrying transient failures with exponential backoff.
    pub fn chat(&self, messages: &[ChatMessage], params: &ChatParams) -> Result<String, RemoteError> {
        if messages.is_empty() {
            return Err(RemoteError::EmptyMessages);
        }
        let body = self.request_body(messages, params);
        let mut attempt = 0;
        loop {
            match self.once(&body) {
                Ok(text) => {
                    debug!("chat reply ({} chars)", text.len());
                    return Ok(text);
                }
                Err(e) if e.retryable() && attempt < self.cfg.retries => {
                    let wait = self.cfg.backoff_ms.saturating_mul(1 << attempt.min(16));
                    warn!("chat attempt {} failed: {e}; retrying in {wait} ms", attempt + 1);
                    std::thread::sleep(Duration::from_millis(wait));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}
