//! Blocking JSON-over-HTTP with retries, shared by the wire resolver, the
//! wire tagger and the chat-completion client.

use serde::{Deserialize, Serialize};
use std::thread;
use std::time::Duration;
use thiserror::Error;

/// Retry schedule for transient failures (transport errors, 429, 5xx).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub max_backoff_ms: u64,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            initial_backoff_ms: 500,
            max_backoff_ms: 8_000,
            multiplier: 2.0,
        }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        Self {
            max_retries: 0,
            ..Self::default()
        }
    }

    /// Delay before retry number `attempt` (1-based).
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = self
            .multiplier
            .max(1.0)
            .powi(attempt.saturating_sub(1) as i32);
        let ms = (self.initial_backoff_ms as f64 * factor).min(self.max_backoff_ms as f64);
        Duration::from_millis(ms as u64)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub(crate) enum HttpError {
    #[error("{url}: {message} (after {attempts} attempt(s))")]
    Transport {
        url: String,
        message: String,
        attempts: u32,
    },
    #[error("{url}: HTTP {status}: {body}")]
    Status {
        url: String,
        status: u16,
        body: String,
    },
    #[error("{url}: undecodable response: {message}")]
    Decode { url: String, message: String },
}

fn retryable(status: u16) -> bool {
    status == 429 || status >= 500
}

pub(crate) fn agent(timeout: Duration) -> ureq::Agent {
    ureq::AgentBuilder::new().timeout(timeout).build()
}

/// POSTs `body` as JSON and decodes the JSON reply, retrying per `policy`.
/// A retryable status that persists is reported as a status error carrying
/// the last body.
pub(crate) fn post_json<B, R>(
    agent: &ureq::Agent,
    url: &str,
    headers: &[(&str, String)],
    body: &B,
    policy: &RetryPolicy,
) -> Result<R, HttpError>
where
    B: Serialize,
    R: for<'de> Deserialize<'de>,
{
    let mut attempt = 0;
    loop {
        attempt += 1;
        let mut request = agent.post(url);
        for (name, value) in headers {
            request = request.set(name, value);
        }
        let outcome = match request.send_json(body) {
            Ok(response) => {
                let text = response.into_string().map_err(|e| HttpError::Decode {
                    url: url.to_string(),
                    message: e.to_string(),
                })?;
                return serde_json::from_str(&text).map_err(|e| HttpError::Decode {
                    url: url.to_string(),
                    message: e.to_string(),
                });
            }
            Err(ureq::Error::Status(status, response)) => {
                let body = response.into_string().unwrap_or_default();
                let err = HttpError::Status {
                    url: url.to_string(),
                    status,
                    body,
                };
                if !retryable(status) {
                    return Err(err);
                }
                err
            }
            Err(ureq::Error::Transport(t)) => HttpError::Transport {
                url: url.to_string(),
                message: t.to_string(),
                attempts: attempt,
            },
        };
        if attempt > policy.max_retries {
            return Err(outcome);
        }
        log::debug!("{outcome}; retry {attempt}/{}", policy.max_retries);
        thread::sleep(policy.backoff(attempt));
    }
}

/// Joins a base URL and a path without doubling slashes.
pub(crate) fn join_url(base: &str, path: &str) -> String {
    format!(
        "{}/{}",
        base.trim_end_matches('/'),
        path.trim_start_matches('/')
    )
}
