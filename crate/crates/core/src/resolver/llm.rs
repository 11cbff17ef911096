use serde::Deserialize;
use std::sync::Arc;

use super::{ChunkResolver, LocalClustering, RawMention, ResolveError};
use crate::qa::{ChatMessage, ChatModel, LlmError};

const SYSTEM: &str = "You are a coreference resolution system. Reply with JSON only.";

const INSTRUCTIONS: &str = "\
Find every mention in the text below (pronouns, nouns, noun phrases and modifiers) \
and group the mentions that refer to the same entity.

Reply with one JSON object of the form
{\"mentions\": [{\"start\": 0, \"end\": 5, \"text\": \"Alice\"}], \"clusters\": [[0, 2]]}
where start and end are Unicode character offsets into the text (end exclusive), \
text is the exact mention string, and each cluster lists indices into mentions.

Text:
";

/// Chat messages asking for the clusters of `chunk_text` as JSON.
pub fn coref_messages(chunk_text: &str) -> Vec<ChatMessage> {
    vec![
        ChatMessage::system(SYSTEM),
        ChatMessage::user(format!("{INSTRUCTIONS}{chunk_text}")),
    ]
}

#[derive(Deserialize)]
struct Reply {
    #[serde(default)]
    mentions: Vec<RawMention>,
    #[serde(default)]
    clusters: Vec<Vec<usize>>,
}

/// Extracts the JSON object from a model reply (code fences and prose
/// around it are ignored) and validates it against `chunk_text`.
pub fn parse_coref_reply(
    chunk_index: usize,
    chunk_text: &str,
    reply: &str,
) -> Result<LocalClustering, ResolveError> {
    let parse_err = |message: String| ResolveError::Parse {
        chunk: chunk_index,
        message,
    };
    let body = match (reply.find('{'), reply.rfind('}')) {
        (Some(open), Some(close)) if open < close => &reply[open..=close],
        _ if reply.trim().is_empty() => return Err(parse_err("empty reply".into())),
        _ => return Err(parse_err("no JSON object in reply".into())),
    };
    let parsed: Reply = serde_json::from_str(body).map_err(|e| parse_err(e.to_string()))?;
    let (clustering, repairs) =
        LocalClustering::from_raw(chunk_index, chunk_text, &parsed.mentions, &parsed.clusters);
    if repairs.dropped_mentions > 0 {
        log::warn!(
            "chunk {chunk_index}: dropped {} mention(s) that do not slice the chunk",
            repairs.dropped_mentions
        );
    }
    Ok(clustering)
}

/// Asks a chat model for each chunk's clusters. Replies that cannot be
/// parsed leave the chunk without clusters (with a warning); transport
/// failures are errors.
pub struct LlmResolver {
    model: Arc<dyn ChatModel>,
}

impl LlmResolver {
    pub fn new(model: Arc<dyn ChatModel>) -> Self {
        Self { model }
    }
}

impl ChunkResolver for LlmResolver {
    fn resolve(
        &self,
        chunk_index: usize,
        chunk_text: &str,
    ) -> Result<LocalClustering, ResolveError> {
        let reply = self
            .model
            .complete(&coref_messages(chunk_text))
            .map_err(|err| match err {
                LlmError::Status { status, body } => ResolveError::Status {
                    chunk: chunk_index,
                    status,
                    body,
                },
                other => ResolveError::Transport {
                    chunk: chunk_index,
                    message: other.to_string(),
                },
            })?;
        match parse_coref_reply(chunk_index, chunk_text, &reply) {
            Ok(clustering) => Ok(clustering),
            Err(err) => {
                log::warn!("{err}; treating the chunk as having no clusters");
                Ok(LocalClustering::empty(chunk_index))
            }
        }
    }
}
