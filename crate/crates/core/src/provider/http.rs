//! HTTP chat-completion and embedding providers.
//!
//! The wire protocol is a JSON POST carrying `{model, messages, temperature,
//! top_p, top_k, seed, max_tokens?}`; the reply text is read from the first
//! choice's message content. Retries use exponential backoff and apply only
//! to transport failures, 5xx, and 429, never to authentication failures.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{
    AttemptRecord, ChatProvider, ChatRequest, ChatResponse, EmbeddingProvider, ProviderConfig,
    ProviderError, Usage,
};

pub struct HttpProvider {
    agent: ureq::Agent,
    config: ProviderConfig,
    api_key: String,
    top_k_rejected: AtomicBool,
}

impl HttpProvider {
    /// Builds a provider from config, reading the credential from the
    /// configured environment variable.
    pub fn from_config(config: ProviderConfig) -> Result<Self, ProviderError> {
        if config.endpoint_url.trim().is_empty() {
            return Err(ProviderError::InvalidRequest(
                "provider endpoint_url is not configured".to_string(),
            ));
        }
        if config.model_id.trim().is_empty() {
            return Err(ProviderError::InvalidRequest(
                "provider model_id is not configured".to_string(),
            ));
        }
        let api_key =
            std::env::var(&config.api_key_env).map_err(|_| ProviderError::MissingCredential {
                env_var: config.api_key_env.clone(),
            })?;
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(120))
            .build();
        Ok(HttpProvider {
            agent,
            config,
            api_key,
            top_k_rejected: AtomicBool::new(false),
        })
    }

    fn request_body(&self, request: &ChatRequest, include_top_k: bool) -> serde_json::Value {
        let messages: Vec<serde_json::Value> = request
            .messages
            .iter()
            .map(|m| json!({"role": m.role, "content": m.content}))
            .collect();
        let mut body = json!({
            "model": self.config.model_id,
            "messages": messages,
            "temperature": request.decoding.temperature,
            "top_p": request.decoding.top_p,
            "seed": request.seed,
        });
        if include_top_k {
            body["top_k"] = json!(request.decoding.top_k);
        }
        if let Some(max_tokens) = request.decoding.max_tokens {
            body["max_tokens"] = json!(max_tokens);
        }
        body
    }
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
    #[serde(default)]
    model: Option<String>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize, Default)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

enum SendOutcome {
    Ok(String),
    Retryable { status: Option<u16>, detail: String },
    Fatal(ProviderError),
}

fn classify_send(result: Result<ureq::Response, ureq::Error>) -> SendOutcome {
    match result {
        Ok(response) => match response.into_string() {
            Ok(body) => SendOutcome::Ok(body),
            Err(e) => SendOutcome::Retryable {
                status: None,
                detail: format!("failed to read response body: {e}"),
            },
        },
        Err(ureq::Error::Status(status, response)) => {
            let body = response.into_string().unwrap_or_default();
            match status {
                401 | 403 => SendOutcome::Fatal(ProviderError::Auth {
                    status,
                    detail: truncate(&body, 300),
                }),
                429 | 500..=599 => SendOutcome::Retryable {
                    status: Some(status),
                    detail: truncate(&body, 300),
                },
                _ => SendOutcome::Fatal(ProviderError::InvalidRequest(format!(
                    "provider rejected the request (status {status}): {}",
                    truncate(&body, 300)
                ))),
            }
        }
        Err(ureq::Error::Transport(transport)) => SendOutcome::Retryable {
            status: None,
            detail: transport.to_string(),
        },
    }
}

fn truncate(text: &str, limit: usize) -> String {
    if text.chars().count() <= limit {
        text.to_string()
    } else {
        let cut: String = text.chars().take(limit).collect();
        format!("{cut}…")
    }
}

/// POSTs `body` with retries per the config. Returns the raw response body.
fn post_with_retry(
    agent: &ureq::Agent,
    url: &str,
    api_key: &str,
    body: &serde_json::Value,
    attempt_cap: u32,
    backoff_base_ms: u64,
) -> Result<String, ProviderError> {
    let mut attempts = Vec::new();
    for attempt in 1..=attempt_cap.max(1) {
        let result = agent
            .post(url)
            .set("Authorization", &format!("Bearer {api_key}"))
            .set("Content-Type", "application/json")
            .send_string(&body.to_string());
        match classify_send(result) {
            SendOutcome::Ok(text) => return Ok(text),
            SendOutcome::Fatal(err) => return Err(err),
            SendOutcome::Retryable { status, detail } => {
                attempts.push(AttemptRecord {
                    attempt,
                    status,
                    detail,
                });
                if attempt < attempt_cap {
                    let backoff = backoff_base_ms.saturating_mul(1 << (attempt - 1));
                    std::thread::sleep(Duration::from_millis(backoff));
                }
            }
        }
    }
    Err(ProviderError::Transport { attempts })
}

impl ChatProvider for HttpProvider {
    fn complete_chat(&self, request: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        if request.messages.is_empty() {
            return Err(ProviderError::InvalidRequest(
                "request must contain at least one message".to_string(),
            ));
        }
        request.decoding.check()?;

        let mut include_top_k =
            self.config.send_top_k && !self.top_k_rejected.load(Ordering::Relaxed);
        let body = self.request_body(request, include_top_k);
        let result = post_with_retry(
            &self.agent,
            &self.config.endpoint_url,
            &self.api_key,
            &body,
            self.config.attempt_cap,
            self.config.backoff_base_ms,
        );

        let raw = match result {
            Ok(raw) => raw,
            // Some endpoints reject top_k outright; drop it and go again.
            Err(ProviderError::InvalidRequest(detail))
                if include_top_k && detail.contains("top_k") =>
            {
                self.top_k_rejected.store(true, Ordering::Relaxed);
                eprintln!(
                    "warning: provider rejected top_k; dropping it for this and later requests"
                );
                include_top_k = false;
                let body = self.request_body(request, include_top_k);
                post_with_retry(
                    &self.agent,
                    &self.config.endpoint_url,
                    &self.api_key,
                    &body,
                    self.config.attempt_cap,
                    self.config.backoff_base_ms,
                )?
            }
            Err(err) => return Err(err),
        };

        let parsed: WireResponse =
            serde_json::from_str(&raw).map_err(|e| ProviderError::MalformedResponse {
                detail: format!("{e}; body: {}", truncate(&raw, 200)),
            })?;
        let choice =
            parsed
                .choices
                .into_iter()
                .next()
                .ok_or_else(|| ProviderError::MalformedResponse {
                    detail: "response contains no choices".to_string(),
                })?;
        let text = choice.message.content.unwrap_or_default();
        if text.is_empty() {
            return Err(ProviderError::Refusal {
                tag: request.tag.clone(),
            });
        }
        let usage = parsed.usage.unwrap_or_default();
        Ok(ChatResponse {
            text,
            provider_model_id: parsed.model.unwrap_or_else(|| self.config.model_id.clone()),
            usage: Usage {
                prompt_units: usage.prompt_tokens,
                completion_units: usage.completion_tokens,
            },
        })
    }

    fn model_id(&self) -> &str {
        &self.config.model_id
    }
}

/// HTTP embedding provider speaking `{model, input: [tokens]}` →
/// `{data: [{embedding: [..]}]}`.
pub struct HttpEmbeddingProvider {
    agent: ureq::Agent,
    config: ProviderConfig,
    api_key: String,
}

impl HttpEmbeddingProvider {
    pub fn from_config(config: ProviderConfig) -> Result<Self, ProviderError> {
        if config.endpoint_url.trim().is_empty() {
            return Err(ProviderError::InvalidRequest(
                "embedding endpoint_url is not configured".to_string(),
            ));
        }
        let api_key =
            std::env::var(&config.api_key_env).map_err(|_| ProviderError::MissingCredential {
                env_var: config.api_key_env.clone(),
            })?;
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(120))
            .build();
        Ok(HttpEmbeddingProvider {
            agent,
            config,
            api_key,
        })
    }
}

#[derive(Deserialize)]
struct WireEmbeddingResponse {
    data: Vec<WireEmbedding>,
}

#[derive(Deserialize)]
struct WireEmbedding {
    embedding: Vec<f64>,
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn embed(&self, tokens: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        if tokens.is_empty() {
            return Ok(Vec::new());
        }
        let body = json!({"model": self.config.model_id, "input": tokens});
        let raw = post_with_retry(
            &self.agent,
            &self.config.endpoint_url,
            &self.api_key,
            &body,
            self.config.attempt_cap,
            self.config.backoff_base_ms,
        )?;
        let parsed: WireEmbeddingResponse =
            serde_json::from_str(&raw).map_err(|e| ProviderError::MalformedResponse {
                detail: format!("{e}; body: {}", truncate(&raw, 200)),
            })?;
        if parsed.data.len() != tokens.len() {
            return Err(ProviderError::MalformedResponse {
                detail: format!(
                    "expected {} embeddings, got {}",
                    tokens.len(),
                    parsed.data.len()
                ),
            });
        }
        Ok(parsed.data.into_iter().map(|d| d.embedding).collect())
    }
}
