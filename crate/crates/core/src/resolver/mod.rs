//! Chunk-level coreference resolution.
//!
//! A [`ChunkResolver`] turns one chunk's text into a [`LocalClustering`].
//! Three backends exist: [`BuiltinResolver`] (deterministic rules),
//! [`WireResolver`] (a model server speaking `POST /resolve`) and
//! [`LlmResolver`] (a chat-completion model asked for JSON clusters). Replies
//! from the remote backends go through [`LocalClustering::from_raw`], which
//! drops spans that do not slice the chunk and makes clusters disjoint.

mod builtin;
mod llm;
mod wire;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::text::CharIndex;

pub use builtin::{builtin_resolve, BuiltinResolver, SENTENCE_INITIAL_STOPWORDS};
pub use llm::{coref_messages, parse_coref_reply, LlmResolver};
pub use wire::{WireResolver, WireResolverConfig};

/// A mention with offsets relative to its chunk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalMention {
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

/// Mentions and clusters found in one chunk. `clusters` holds indices into
/// `mentions`; each mention belongs to at most one cluster.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LocalClustering {
    pub chunk_index: usize,
    pub mentions: Vec<LocalMention>,
    pub clusters: Vec<Vec<usize>>,
}

/// A mention span as reported by a remote backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMention {
    pub start: usize,
    pub end: usize,
    /// Optional surface; when present it must equal the sliced text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

/// What [`LocalClustering::from_raw`] had to discard.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Repairs {
    pub dropped_mentions: usize,
    pub dropped_references: usize,
}

impl LocalClustering {
    pub fn empty(chunk_index: usize) -> Self {
        Self {
            chunk_index,
            ..Self::default()
        }
    }

    /// Builds a valid clustering from untrusted spans and groupings.
    ///
    /// Spans outside the chunk, empty spans, spans whose `text` disagrees
    /// with the chunk and repeated spans are dropped. Cluster references to
    /// dropped or unknown mentions are removed, a mention already placed in
    /// an earlier cluster is removed from later ones, and empty clusters
    /// vanish. Mentions come out sorted by `(start, end)`.
    pub fn from_raw(
        chunk_index: usize,
        chunk_text: &str,
        mentions: &[RawMention],
        clusters: &[Vec<usize>],
    ) -> (Self, Repairs) {
        let idx = CharIndex::new(chunk_text);
        let len = idx.len();
        let mut repairs = Repairs::default();
        let mut kept: Vec<(usize, usize, usize)> = Vec::new();
        for (i, m) in mentions.iter().enumerate() {
            let valid = m.start < m.end
                && m.end <= len
                && m.text
                    .as_deref()
                    .is_none_or(|t| t == idx.slice(chunk_text, m.start, m.end));
            if valid && !kept.iter().any(|&(s, e, _)| (s, e) == (m.start, m.end)) {
                kept.push((m.start, m.end, i));
            } else {
                repairs.dropped_mentions += 1;
            }
        }
        kept.sort_unstable();
        let mut remap = vec![None; mentions.len()];
        for (new, &(_, _, old)) in kept.iter().enumerate() {
            remap[old] = Some(new);
        }
        let mut assigned = vec![false; kept.len()];
        let mut out_clusters = Vec::new();
        for cluster in clusters {
            let mut members = Vec::new();
            for &old in cluster {
                match remap.get(old).copied().flatten() {
                    Some(new) if !assigned[new] => {
                        assigned[new] = true;
                        members.push(new);
                    }
                    _ => repairs.dropped_references += 1,
                }
            }
            if !members.is_empty() {
                members.sort_unstable();
                out_clusters.push(members);
            }
        }
        let clustering = Self {
            chunk_index,
            mentions: kept
                .iter()
                .map(|&(start, end, _)| LocalMention {
                    start,
                    end,
                    surface: idx.slice(chunk_text, start, end).to_string(),
                })
                .collect(),
            clusters: out_clusters,
        };
        (clustering, repairs)
    }

    /// Checks the clustering invariants against `chunk_text`.
    pub fn check(&self, chunk_text: &str) -> Result<(), String> {
        let idx = CharIndex::new(chunk_text);
        for (i, m) in self.mentions.iter().enumerate() {
            if !(m.start < m.end && m.end <= idx.len()) {
                return Err(format!(
                    "mention {i} span {}..{} out of range",
                    m.start, m.end
                ));
            }
            if idx.slice(chunk_text, m.start, m.end) != m.surface {
                return Err(format!("mention {i} surface does not match its span"));
            }
        }
        let mut seen = vec![false; self.mentions.len()];
        for cluster in &self.clusters {
            for &m in cluster {
                if m >= seen.len() {
                    return Err(format!("cluster refers to unknown mention {m}"));
                }
                if std::mem::replace(&mut seen[m], true) {
                    return Err(format!("mention {m} is in two clusters"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResolveError {
    #[error("chunk {chunk}: resolver unreachable: {message}")]
    Transport { chunk: usize, message: String },
    #[error("chunk {chunk}: resolver returned HTTP {status}: {body}")]
    Status {
        chunk: usize,
        status: u16,
        body: String,
    },
    #[error("chunk {chunk}: unparsable resolver reply: {message}")]
    Parse { chunk: usize, message: String },
}

impl ResolveError {
    pub fn chunk(&self) -> usize {
        match self {
            ResolveError::Transport { chunk, .. }
            | ResolveError::Status { chunk, .. }
            | ResolveError::Parse { chunk, .. } => *chunk,
        }
    }
}

/// Produces a chunk's mentions and clusters. Implementations must be safe to
/// call from several threads at once.
pub trait ChunkResolver: Send + Sync {
    fn resolve(
        &self,
        chunk_index: usize,
        chunk_text: &str,
    ) -> Result<LocalClustering, ResolveError>;

    /// Whether the backend serializes requests itself; the pipeline then
    /// resolves chunks one at a time.
    fn serial(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Builtin,
    Wire,
    Llm,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Builtin => "builtin",
            Backend::Wire => "wire",
            Backend::Llm => "llm",
        })
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "builtin" => Ok(Backend::Builtin),
            "wire" => Ok(Backend::Wire),
            "llm" => Ok(Backend::Llm),
            other => Err(format!(
                "unknown backend `{other}` (expected builtin | wire | llm)"
            )),
        }
    }
}
