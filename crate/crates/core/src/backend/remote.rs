//! Chat-completion HTTP client with inline image attachments.

use std::path::Path;
use std::time::{Duration, Instant};

use base64::Engine as _;
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};

use crate::time::Seconds;

use super::{BackendError, Generator, GeneratorRequest, GeneratorResponse, DEFAULT_PAYLOAD_LIMIT};

pub const ENV_API_BASE: &str = "COMMENTARY_API_BASE";
pub const ENV_API_KEY: &str = "COMMENTARY_API_KEY";
pub const ENV_MODEL: &str = "COMMENTARY_MODEL";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(8),
        }
    }
}

impl RetryPolicy {
    /// Delay before attempt `attempt + 1`, doubling from `base_delay`.
    pub fn delay_after(&self, attempt: u32) -> Duration {
        let factor = 1u32 << attempt.saturating_sub(1).min(16);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    /// Base URL; `/chat/completions` is appended.
    pub api_base: String,
    pub api_key: Option<String>,
    pub model: String,
    pub payload_limit: usize,
    pub timeout: Duration,
    pub retry: RetryPolicy,
}

impl RemoteConfig {
    pub fn new(api_base: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            api_base: api_base.into(),
            api_key: None,
            model: model.into(),
            payload_limit: DEFAULT_PAYLOAD_LIMIT,
            timeout: Duration::from_secs(120),
            retry: RetryPolicy::default(),
        }
    }

    /// Reads `COMMENTARY_API_BASE`, `COMMENTARY_API_KEY` and `COMMENTARY_MODEL`.
    pub fn from_env() -> Result<Self, BackendError> {
        let base = std::env::var(ENV_API_BASE)
            .map_err(|_| BackendError::Config(format!("{ENV_API_BASE} is not set")))?;
        let model = std::env::var(ENV_MODEL)
            .map_err(|_| BackendError::Config(format!("{ENV_MODEL} is not set")))?;
        let mut cfg = Self::new(base, model);
        cfg.api_key = std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty());
        Ok(cfg)
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.api_base.trim_end_matches('/'))
    }
}

pub struct RemoteClient {
    config: RemoteConfig,
    http: Client,
}

enum Attempt {
    Done(String),
    Retry(BackendError),
    Fail(BackendError),
}

impl RemoteClient {
    pub fn new(config: RemoteConfig) -> Result<Self, BackendError> {
        let http = Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(Self { config, http })
    }

    pub fn from_env() -> Result<Self, BackendError> {
        Self::new(RemoteConfig::from_env()?)
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    /// The JSON body sent for a request. Prompt text is passed through untouched.
    pub fn request_body(&self, request: &GeneratorRequest) -> Result<Value, BackendError> {
        let mut content = vec![json!({ "type": "text", "text": request.prompt.text })];
        for uri in &request.prompt.attachments {
            content.push(json!({
                "type": "image_url",
                "image_url": { "url": image_url(uri)? }
            }));
        }
        Ok(json!({
            "model": self.config.model,
            "temperature": request.temperature,
            "max_tokens": request.max_output_units,
            "messages": [{ "role": "user", "content": content }],
        }))
    }

    fn attempt(&self, body: &Value) -> Attempt {
        let mut builder = self.http.post(self.config.endpoint()).json(body);
        if let Some(key) = &self.config.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = match builder.send() {
            Ok(r) => r,
            Err(e) => {
                return Attempt::Retry(BackendError::Transport {
                    attempts: 0,
                    message: e.to_string(),
                })
            }
        };
        let status = response.status();
        let text = response.text().unwrap_or_default();
        match status {
            s if s.is_success() => match extract_content(&text) {
                Ok(content) => Attempt::Done(content),
                Err(e) => Attempt::Fail(e),
            },
            StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => {
                Attempt::Fail(BackendError::Auth(format!("HTTP {status}")))
            }
            StatusCode::TOO_MANY_REQUESTS => Attempt::Retry(BackendError::RateLimited { attempts: 0 }),
            StatusCode::PAYLOAD_TOO_LARGE => Attempt::Fail(BackendError::PayloadTooLarge {
                attachments: body["messages"][0]["content"]
                    .as_array()
                    .map_or(0, |c| c.len().saturating_sub(1)),
                limit: self.config.payload_limit,
            }),
            s if s.is_server_error() => Attempt::Retry(BackendError::Transport {
                attempts: 0,
                message: format!("HTTP {s}"),
            }),
            s => Attempt::Fail(BackendError::Protocol(format!("HTTP {s}: {}", truncate(&text, 200)))),
        }
    }
}

impl Generator for RemoteClient {
    fn generate(&self, request: &GeneratorRequest) -> Result<GeneratorResponse, BackendError> {
        request.validate()?;
        let n = request.prompt.attachments.len();
        if n > self.config.payload_limit {
            return Err(BackendError::PayloadTooLarge {
                attachments: n,
                limit: self.config.payload_limit,
            });
        }
        let body = self.request_body(request)?;
        let started = Instant::now();
        let max_attempts = self.config.retry.max_attempts.max(1);
        let mut attempt = 1;
        loop {
            match self.attempt(&body) {
                Attempt::Done(raw_text) => {
                    return Ok(GeneratorResponse {
                        raw_text,
                        latency: Seconds::from_secs(started.elapsed().as_secs_f64()),
                        model_id: self.config.model.clone(),
                    })
                }
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) => {
                    if attempt >= max_attempts {
                        return Err(match e {
                            BackendError::Transport { message, .. } => BackendError::Transport {
                                attempts: attempt,
                                message,
                            },
                            BackendError::RateLimited { .. } => {
                                BackendError::RateLimited { attempts: attempt }
                            }
                            other => other,
                        });
                    }
                    log::debug!("attempt {attempt} failed ({e}), retrying");
                    std::thread::sleep(self.config.retry.delay_after(attempt));
                    attempt += 1;
                }
            }
        }
    }
}

fn truncate(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

fn mime_for(path: &Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("png") => "image/png",
        Some("webp") => "image/webp",
        Some("gif") => "image/gif",
        _ => "application/octet-stream",
    }
}

/// Remote and data URIs pass through; local files become base64 data URIs.
pub(crate) fn image_url(uri: &str) -> Result<String, BackendError> {
    if uri.starts_with("http://") || uri.starts_with("https://") || uri.starts_with("data:") {
        return Ok(uri.to_string());
    }
    let path_str = uri.strip_prefix("file://").unwrap_or(uri);
    if uri.contains("://") && !uri.starts_with("file://") {
        return Ok(uri.to_string());
    }
    let path = Path::new(path_str);
    let bytes = std::fs::read(path)
        .map_err(|e| BackendError::InvalidRequest(format!("image {}: {e}", path.display())))?;
    Ok(format!(
        "data:{};base64,{}",
        mime_for(path),
        base64::engine::general_purpose::STANDARD.encode(bytes)
    ))
}

fn extract_content(body: &str) -> Result<String, BackendError> {
    let v: Value = serde_json::from_str(body)
        .map_err(|e| BackendError::Protocol(format!("invalid JSON: {e}")))?;
    let content = &v["choices"][0]["message"]["content"];
    match content {
        Value::String(s) => Ok(s.clone()),
        Value::Array(parts) => Ok(parts
            .iter()
            .filter_map(|p| p["text"].as_str())
            .collect::<Vec<_>>()
            .join("")),
        Value::Null => Err(BackendError::Protocol("reply has no choices[0].message.content".into())),
        other => Err(BackendError::Protocol(format!("unexpected content {other}"))),
    }
}
