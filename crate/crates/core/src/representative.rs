//! Pronoun tagging and representative-mention selection.
//!
//! A global cluster's representative is the non-pronoun surface form that
//! occurs most often in the cluster, with ties going to the form seen first in
//! the document. Clusters made only of pronouns have no representative and
//! are left untouched by the rewriter.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;
use thiserror::Error;

use crate::http::{self, HttpError, RetryPolicy};
use crate::merge::{GlobalCluster, GlobalMention, MentionId};
use crate::text::{char_len, normalize_surface, tokenize, CharIndex};

/// Case-folded pronoun lexicon used by the builtin tagger and resolver.
pub const PRONOUNS: &[&str] = &[
    "he",
    "she",
    "it",
    "they",
    "him",
    "her",
    "them",
    "his",
    "hers",
    "its",
    "their",
    "theirs",
    "i",
    "you",
    "we",
    "me",
    "us",
    "this",
    "that",
    "these",
    "those",
    "who",
    "whom",
    "which",
    "himself",
    "herself",
    "itself",
    "themselves",
    "myself",
    "yourself",
    "ourselves",
];

pub fn is_pronoun_word(word: &str) -> bool {
    let folded = word.to_lowercase();
    PRONOUNS.contains(&folded.as_str())
}

/// Universal part-of-speech tags; the builtin tagger only emits `Pron` and
/// `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl FromStr for Pos {
    type Err = std::convert::Infallible;

    /// Unknown tags map to `X`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "ADJ" => Pos::Adj,
            "ADP" => Pos::Adp,
            "ADV" => Pos::Adv,
            "AUX" => Pos::Aux,
            "CCONJ" | "CONJ" => Pos::Cconj,
            "DET" => Pos::Det,
            "INTJ" => Pos::Intj,
            "NOUN" => Pos::Noun,
            "NUM" => Pos::Num,
            "PART" => Pos::Part,
            "PRON" => Pos::Pron,
            "PROPN" => Pos::Propn,
            "PUNCT" => Pos::Punct,
            "SCONJ" => Pos::Sconj,
            "SYM" => Pos::Sym,
            "VERB" => Pos::Verb,
            _ => Pos::X,
        })
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let json = serde_json::to_value(self).expect("tag serializes");
        f.write_str(json.as_str().unwrap_or("X"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub start: usize,
    pub end: usize,
    pub pos: Pos,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TagError {
    #[error("tagger transport error: {0}")]
    Transport(String),
    #[error("tagger returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("tagger reply could not be decoded: {0}")]
    Parse(String),
}

impl From<HttpError> for TagError {
    fn from(err: HttpError) -> Self {
        match err {
            HttpError::Transport { .. } => TagError::Transport(err.to_string()),
            HttpError::Status { status, body, .. } => TagError::Status { status, body },
            HttpError::Decode { message, .. } => TagError::Parse(message),
        }
    }
}

/// Produces POS tags over a whole document.
pub trait PosTagger: Send + Sync {
    fn tag(&self, text: &str) -> Result<Vec<TaggedToken>, TagError>;
}

/// Lexicon lookup: pronouns are `PRON`, everything else `X`.
pub fn tag_pronouns(text: &str) -> Vec<TaggedToken> {
    let idx = CharIndex::new(text);
    tokenize(text)
        .into_iter()
        .map(|t| TaggedToken {
            start: t.start,
            end: t.end,
            pos: if is_pronoun_word(idx.slice(text, t.start, t.end)) {
                Pos::Pron
            } else {
                Pos::X
            },
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinTagger;

impl PosTagger for BuiltinTagger {
    fn tag(&self, text: &str) -> Result<Vec<TaggedToken>, TagError> {
        Ok(tag_pronouns(text))
    }
}

#[derive(Serialize)]
struct TagRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct TagResponse {
    tokens: Vec<WireToken>,
}

#[derive(Deserialize)]
struct WireToken {
    start: usize,
    end: usize,
    pos: String,
}

/// Client for the `POST /tag` protocol.
pub struct WireTagger {
    url: String,
    agent: ureq::Agent,
    retry: RetryPolicy,
}

impl WireTagger {
    pub fn new(endpoint: &str, timeout: Duration, retry: RetryPolicy) -> Self {
        Self {
            url: http::join_url(endpoint, "tag"),
            agent: http::agent(timeout),
            retry,
        }
    }
}

impl PosTagger for WireTagger {
    fn tag(&self, text: &str) -> Result<Vec<TaggedToken>, TagError> {
        let reply: TagResponse = http::post_json(
            &self.agent,
            &self.url,
            &[],
            &TagRequest { text },
            &self.retry,
        )?;
        let len = char_len(text);
        let mut tokens: Vec<TaggedToken> = Vec::with_capacity(reply.tokens.len());
        for t in reply.tokens {
            let in_order = tokens.last().is_none_or(|prev| prev.end <= t.start);
            if t.start < t.end && t.end <= len && in_order {
                tokens.push(TaggedToken {
                    start: t.start,
                    end: t.end,
                    pos: t.pos.parse().unwrap(),
                });
            } else {
                log::warn!("dropping invalid tagger span {}..{}", t.start, t.end);
            }
        }
        Ok(tokens)
    }
}

/// Whether any tagged token overlapping `start..end` is a pronoun. `tags`
/// must be sorted and non-overlapping.
pub fn is_pronoun_mention(start: usize, end: usize, tags: &[TaggedToken]) -> bool {
    let first = tags.partition_point(|t| t.end <= start);
    tags[first..]
        .iter()
        .take_while(|t| t.start < end)
        .any(|t| t.pos == Pos::Pron)
}

/// Occurrence statistics of one normalized surface form within a cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurfaceStat {
    pub surface: String,
    pub count: usize,
    pub first_position: usize,
    /// Earliest mention carrying this surface.
    pub first_mention: MentionId,
    pub is_pronoun: bool,
}

/// Groups the members of `cluster` by normalized surface. A surface counts
/// as a pronoun if any of its instances is one. Sorted by first position.
pub fn surface_stats(
    cluster: &GlobalCluster,
    mentions: &[GlobalMention],
    pronoun: &[bool],
) -> Vec<SurfaceStat> {
    let mut by_surface: HashMap<String, SurfaceStat> = HashMap::new();
    for &id in &cluster.members {
        let m = &mentions[id.0];
        let entry = by_surface
            .entry(normalize_surface(&m.surface))
            .or_insert_with_key(|key| SurfaceStat {
                surface: key.clone(),
                count: 0,
                first_position: m.start,
                first_mention: id,
                is_pronoun: false,
            });
        entry.count += 1;
        entry.is_pronoun |= pronoun[id.0];
        if (m.start, m.end)
            < (
                mentions[entry.first_mention.0].start,
                mentions[entry.first_mention.0].end,
            )
        {
            entry.first_position = m.start;
            entry.first_mention = id;
        }
    }
    let mut stats: Vec<SurfaceStat> = by_surface.into_values().collect();
    stats.sort_by_key(|s| (s.first_position, s.first_mention));
    stats
}

/// Most frequent non-pronoun surface of `cluster`, earliest on ties; returns
/// its earliest instance, or `None` when every member is a pronoun.
pub fn select_representative(
    cluster: &GlobalCluster,
    mentions: &[GlobalMention],
    pronoun: &[bool],
) -> Option<MentionId> {
    surface_stats(cluster, mentions, pronoun)
        .into_iter()
        .filter(|s| !s.is_pronoun)
        .min_by(|a, b| {
            b.count
                .cmp(&a.count)
                .then(a.first_position.cmp(&b.first_position))
                .then(a.first_mention.cmp(&b.first_mention))
        })
        .map(|s| s.first_mention)
}
