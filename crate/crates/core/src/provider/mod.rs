//! Uniform access to chat-completion providers, plus prompt-template
//! rendering.
//!
//! Everything that opens a network connection lives in this module. The rest
//! of the crate talks to providers through the [`ChatProvider`] and
//! [`EmbeddingProvider`] traits, so any pipeline run against the scripted
//! [`MockProvider`] with fixed seeds is byte-reproducible.

mod http;
mod mock;
mod template;

pub use http::{HttpEmbeddingProvider, HttpProvider};
pub use mock::{HashEmbedder, MockProvider, MockScript};
pub use template::{PromptTemplate, Rendered, TemplateError, TemplateStore, BUILTIN_VERSION};

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Message author as seen by chat-completion endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MsgRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: MsgRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: MsgRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: MsgRole::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: MsgRole::Assistant,
            content: content.into(),
        }
    }
}

/// Sampling settings sent with every request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodingConfig {
    pub temperature: f64,
    pub top_p: f64,
    pub top_k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl Default for DecodingConfig {
    fn default() -> Self {
        DecodingConfig {
            temperature: 0.9,
            top_p: 0.75,
            top_k: 20,
            max_tokens: None,
        }
    }
}

impl DecodingConfig {
    pub fn check(&self) -> Result<(), ProviderError> {
        if self.temperature < 0.0 {
            return Err(ProviderError::InvalidRequest(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(ProviderError::InvalidRequest(format!(
                "top_p must be in (0, 1], got {}",
                self.top_p
            )));
        }
        if self.top_k < 1 {
            return Err(ProviderError::InvalidRequest(
                "top_k must be >= 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// One chat-completion request. `tag` labels the pipeline stage issuing the
/// request and is what the mock provider scripts against.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub decoding: DecodingConfig,
    pub tag: String,
    pub seed: u64,
}

impl ChatRequest {
    pub fn new(
        messages: Vec<ChatMessage>,
        decoding: DecodingConfig,
        tag: impl Into<String>,
        seed: u64,
    ) -> Result<Self, ProviderError> {
        if messages.is_empty() {
            return Err(ProviderError::InvalidRequest(
                "request must contain at least one message".to_string(),
            ));
        }
        decoding.check()?;
        Ok(ChatRequest {
            messages,
            decoding,
            tag: tag.into(),
            seed,
        })
    }

    /// Single user message with default decoding.
    pub fn simple(prompt: impl Into<String>, tag: impl Into<String>, seed: u64) -> Self {
        ChatRequest {
            messages: vec![ChatMessage::user(prompt)],
            decoding: DecodingConfig::default(),
            tag: tag.into(),
            seed,
        }
    }

    pub(crate) fn prompt_chars(&self) -> u64 {
        self.messages
            .iter()
            .map(|m| m.content.chars().count() as u64)
            .sum()
    }
}

/// Opaque usage counts reported by a provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_units: u64,
    pub completion_units: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub text: String,
    pub provider_model_id: String,
    pub usage: Usage,
}

/// One failed delivery attempt, kept for the final transport error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: u32,
    pub status: Option<u16>,
    pub detail: String,
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("credential env var `{env_var}` is not set")]
    MissingCredential { env_var: String },

    #[error("authentication failed (status {status}): {detail}")]
    Auth { status: u16, detail: String },

    #[error("transport failed after {} attempts: {}", attempts.len(), summarize_attempts(attempts))]
    Transport { attempts: Vec<AttemptRecord> },

    #[error("provider refused or returned empty content for tag `{tag}`")]
    Refusal { tag: String },

    #[error("no scripted response for tag `{tag}` and no fallback configured")]
    UnknownTag { tag: String },

    #[error("malformed provider response: {detail}")]
    MalformedResponse { detail: String },
}

fn summarize_attempts(attempts: &[AttemptRecord]) -> String {
    attempts
        .iter()
        .map(|a| match a.status {
            Some(status) => format!("#{} status {status}: {}", a.attempt, a.detail),
            None => format!("#{}: {}", a.attempt, a.detail),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// A chat-completion backend. Implementations must be shareable across the
/// pipeline's worker threads.
pub trait ChatProvider: Send + Sync {
    fn complete_chat(&self, request: &ChatRequest) -> Result<ChatResponse, ProviderError>;

    /// Identifier recorded in provenance.
    fn model_id(&self) -> &str;
}

/// A token-embedding backend for embedding-based metrics.
pub trait EmbeddingProvider: Send + Sync {
    /// Returns one vector per input token; all vectors share one dimension.
    fn embed(&self, tokens: &[String]) -> Result<Vec<Vec<f64>>, ProviderError>;
}

/// Cumulative usage across every response delivered through a
/// [`MeteredProvider`].
#[derive(Debug, Default)]
pub struct UsageMeter {
    prompt_units: AtomicU64,
    completion_units: AtomicU64,
    calls: AtomicU64,
}

/// Usage totals snapshot for run reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UsageTotals {
    pub prompt_units: u64,
    pub completion_units: u64,
    pub calls: u64,
}

impl UsageMeter {
    fn record(&self, usage: Usage) {
        self.prompt_units
            .fetch_add(usage.prompt_units, Ordering::Relaxed);
        self.completion_units
            .fetch_add(usage.completion_units, Ordering::Relaxed);
        self.calls.fetch_add(1, Ordering::Relaxed);
    }

    pub fn totals(&self) -> UsageTotals {
        UsageTotals {
            prompt_units: self.prompt_units.load(Ordering::Relaxed),
            completion_units: self.completion_units.load(Ordering::Relaxed),
            calls: self.calls.load(Ordering::Relaxed),
        }
    }
}

/// Wraps a provider and accumulates the usage of every successful response,
/// so per-run totals equal the sum over all responses.
pub struct MeteredProvider {
    inner: Arc<dyn ChatProvider>,
    meter: Arc<UsageMeter>,
}

impl MeteredProvider {
    pub fn new(inner: Arc<dyn ChatProvider>) -> Self {
        MeteredProvider {
            inner,
            meter: Arc::new(UsageMeter::default()),
        }
    }

    pub fn meter(&self) -> Arc<UsageMeter> {
        Arc::clone(&self.meter)
    }
}

impl ChatProvider for MeteredProvider {
    fn complete_chat(&self, request: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        let response = self.inner.complete_chat(request)?;
        self.meter.record(response.usage);
        Ok(response)
    }

    fn model_id(&self) -> &str {
        self.inner.model_id()
    }
}

/// Provider connection settings, loadable from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub endpoint_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the credential.
    pub api_key_env: String,
    pub decoding: DecodingConfig,
    /// Maximum in-flight requests per pipeline stage.
    pub concurrency: usize,
    /// Total delivery attempts before a transport error is returned.
    pub attempt_cap: u32,
    /// Base backoff before the second attempt; doubles per retry.
    pub backoff_base_ms: u64,
    /// Whether to include `top_k` in the wire request. Providers that reject
    /// it get it dropped automatically with a logged warning.
    pub send_top_k: bool,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            endpoint_url: String::new(),
            model_id: String::new(),
            api_key_env: "PROVIDER_API_KEY".to_string(),
            decoding: DecodingConfig::default(),
            concurrency: 4,
            attempt_cap: 3,
            backoff_base_ms: 1000,
            send_top_k: true,
        }
    }
}
