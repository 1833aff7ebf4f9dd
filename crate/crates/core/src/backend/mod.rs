//! The generator boundary: hosted models, deterministic mocks, and a record/replay cache.

use std::sync::Arc;

use thiserror::Error;

use crate::prompting::RenderedPrompt;
use crate::time::Seconds;

mod cache;
mod limit;
mod oracle;
mod remote;
mod scripted;

pub use cache::{read_cache_entry, CacheEntry, CacheMode, ReplayCache};
pub use limit::Limited;
pub use oracle::OracleBackend;
pub use remote::{RemoteClient, RemoteConfig, RetryPolicy, ENV_API_BASE, ENV_API_KEY, ENV_MODEL};
pub use scripted::ScriptedBackend;

pub const DEFAULT_PAYLOAD_LIMIT: usize = 32;
pub const DEFAULT_MAX_OUTPUT_UNITS: u32 = 256;
pub const DEFAULT_CONCURRENCY: usize = 4;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("authentication rejected: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempt(s)")]
    RateLimited { attempts: u32 },
    #[error("payload too large: {attachments} attachments (limit {limit})")]
    PayloadTooLarge { attachments: usize, limit: usize },
    #[error("unexpected reply: {0}")]
    Protocol(String),
    #[error("replay cache miss for digest {digest}")]
    CacheMiss { digest: String },
    #[error("cache {path}: {message}")]
    Cache { path: String, message: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

impl BackendError {
    /// Whether the failure stems from setup (configuration, cold cache) rather than the run.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            BackendError::CacheMiss { .. }
                | BackendError::Config(_)
                | BackendError::Auth(_)
                | BackendError::InvalidRequest(_)
        )
    }
}

/// Where a request sits inside its session. Mocks key on this; remote clients ignore it.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestContext {
    pub video_id: String,
    pub index: usize,
    pub time: Seconds,
    /// Time of the previous query; `None` at initialization.
    pub previous_time: Option<Seconds>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorRequest {
    pub prompt: RenderedPrompt,
    pub model_id: String,
    pub max_output_units: u32,
    pub temperature: f64,
    pub context: RequestContext,
}

impl GeneratorRequest {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.max_output_units == 0 {
            return Err(BackendError::InvalidRequest(
                "max_output_units must be positive".into(),
            ));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(BackendError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorResponse {
    pub raw_text: String,
    pub latency: Seconds,
    pub model_id: String,
}

/// A multimodal text generator. Implementations must tolerate concurrent calls.
pub trait Generator: Send + Sync {
    fn generate(&self, request: &GeneratorRequest) -> Result<GeneratorResponse, BackendError>;
}

impl<G: Generator + ?Sized> Generator for Box<G> {
    fn generate(&self, request: &GeneratorRequest) -> Result<GeneratorResponse, BackendError> {
        (**self).generate(request)
    }
}

impl<G: Generator + ?Sized> Generator for Arc<G> {
    fn generate(&self, request: &GeneratorRequest) -> Result<GeneratorResponse, BackendError> {
        (**self).generate(request)
    }
}

impl<G: Generator + ?Sized> Generator for &G {
    fn generate(&self, request: &GeneratorRequest) -> Result<GeneratorResponse, BackendError> {
        (**self).generate(request)
    }
}

/// Request parameters that are not part of the prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestParams {
    pub model_id: String,
    pub max_output_units: u32,
    pub temperature: f64,
}

impl Default for RequestParams {
    fn default() -> Self {
        Self {
            model_id: "default".into(),
            max_output_units: DEFAULT_MAX_OUTPUT_UNITS,
            temperature: 0.0,
        }
    }
}
