use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use super::{ChatMessage, ChatModel, LlmError};
use crate::http::{self, HttpError, RetryPolicy};

/// Settings for an OpenAI-compatible chat-completion endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    /// Base URL, e.g. `https://api.openai.com/v1`; requests go to
    /// `{endpoint}/chat/completions`.
    pub endpoint: String,
    pub model: String,
    pub max_context_tokens: usize,
    /// `0.0` is greedy decoding.
    pub temperature: f32,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_ms: u64,
    pub retry: RetryPolicy,
    /// Upper bound on concurrent requests.
    pub max_in_flight: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1".to_string(),
            model: "gpt-4o".to_string(),
            max_context_tokens: 128_000,
            temperature: 0.0,
            api_key_env: "OPENAI_API_KEY".to_string(),
            timeout_ms: 120_000,
            retry: RetryPolicy::default(),
            max_in_flight: 4,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.max_context_tokens < 1 {
            return Err(LlmError::Config(
                "max_context_tokens must be at least 1".into(),
            ));
        }
        if self.model.trim().is_empty() {
            return Err(LlmError::Config("model name is empty".into()));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f32,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<CompletionChoice>,
}

#[derive(Deserialize)]
struct CompletionChoice {
    message: CompletionMessage,
}

#[derive(Deserialize)]
struct CompletionMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Blocking chat-completion client with retries on 429, 5xx and transport
/// failures.
pub struct ChatClient {
    url: String,
    agent: ureq::Agent,
    api_key: String,
    config: LlmConfig,
    next_id: AtomicU64,
}

impl ChatClient {
    /// Reads the API key from `config.api_key_env`; a missing key is a
    /// configuration error raised before any request is made.
    pub fn new(config: LlmConfig) -> Result<Self, LlmError> {
        config.validate()?;
        let api_key = std::env::var(&config.api_key_env).map_err(|_| {
            LlmError::Config(format!(
                "environment variable {} with the API key is not set",
                config.api_key_env
            ))
        })?;
        Ok(Self {
            url: http::join_url(&config.endpoint, "chat/completions"),
            agent: http::agent(Duration::from_millis(config.timeout_ms)),
            api_key,
            config,
            next_id: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }
}

impl ChatModel for ChatClient {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        let request_id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let headers = [
            ("Authorization", format!("Bearer {}", self.api_key)),
            (
                "X-Request-Id",
                format!("lqca-{}-{request_id}", std::process::id()),
            ),
        ];
        let body = CompletionRequest {
            model: &self.config.model,
            messages,
            temperature: self.config.temperature,
        };
        let reply: CompletionResponse =
            http::post_json(&self.agent, &self.url, &headers, &body, &self.config.retry).map_err(
                |err| match err {
                    HttpError::Transport { .. } => LlmError::Transport(err.to_string()),
                    HttpError::Status { status, body, .. } => LlmError::Status { status, body },
                    HttpError::Decode { message, .. } => LlmError::Decode(message),
                },
            )?;
        reply
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content.unwrap_or_default())
            .ok_or_else(|| LlmError::Decode("reply has no choices".into()))
    }
}

/// One-shot helper: builds a client from `config` and sends `messages`.
pub fn ask(messages: &[ChatMessage], config: &LlmConfig) -> Result<String, LlmError> {
    ChatClient::new(config.clone())?.complete(messages)
}
