use serde::{Deserialize, Serialize};
use std::time::Duration;

use super::{ChunkResolver, LocalClustering, RawMention, ResolveError};
use crate::http::{self, HttpError, RetryPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WireResolverConfig {
    /// Base URL; requests go to `{endpoint}/resolve`.
    pub endpoint: String,
    pub timeout_ms: u64,
    pub retry: RetryPolicy,
    /// Declare that the server cannot take concurrent requests.
    pub serial: bool,
}

impl Default for WireResolverConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8765".to_string(),
            timeout_ms: 60_000,
            retry: RetryPolicy::default(),
            serial: false,
        }
    }
}

#[derive(Serialize)]
struct ResolveRequest<'a> {
    chunk_id: usize,
    text: &'a str,
}

#[derive(Deserialize)]
struct ResolveResponse {
    mentions: Vec<RawMention>,
    #[serde(default)]
    clusters: Vec<Vec<usize>>,
}

/// Client for the `POST /resolve` protocol (code point offsets).
pub struct WireResolver {
    url: String,
    agent: ureq::Agent,
    config: WireResolverConfig,
}

impl WireResolver {
    pub fn new(config: WireResolverConfig) -> Self {
        Self {
            url: http::join_url(&config.endpoint, "resolve"),
            agent: http::agent(Duration::from_millis(config.timeout_ms)),
            config,
        }
    }
}

impl ChunkResolver for WireResolver {
    fn resolve(
        &self,
        chunk_index: usize,
        chunk_text: &str,
    ) -> Result<LocalClustering, ResolveError> {
        let request = ResolveRequest {
            chunk_id: chunk_index,
            text: chunk_text,
        };
        let reply: ResolveResponse =
            http::post_json(&self.agent, &self.url, &[], &request, &self.config.retry).map_err(
                |err| match err {
                    HttpError::Transport { .. } => ResolveError::Transport {
                        chunk: chunk_index,
                        message: err.to_string(),
                    },
                    HttpError::Status { status, body, .. } => ResolveError::Status {
                        chunk: chunk_index,
                        status,
                        body,
                    },
                    HttpError::Decode { message, .. } => ResolveError::Parse {
                        chunk: chunk_index,
                        message,
                    },
                },
            )?;
        let (clustering, repairs) =
            LocalClustering::from_raw(chunk_index, chunk_text, &reply.mentions, &reply.clusters);
        if repairs != Default::default() {
            log::warn!(
                "chunk {chunk_index}: dropped {} invalid mention(s) and {} cluster reference(s) from the resolver",
                repairs.dropped_mentions,
                repairs.dropped_references
            );
        }
        Ok(clustering)
    }

    fn serial(&self) -> bool {
        self.config.serial
    }
}
