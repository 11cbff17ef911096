//! Cross-chunk merging of coreference clusters.
//!
//! Chunk-local mentions are lifted to document offsets and deduplicated
//! ([`unify_mentions`]). Every pair of mentions detected together in a chunk
//! collects one vote per such chunk: `s` when the chunk clusters them
//! together, `t` otherwise ([`accumulate_pair_stats`]). The direct distance of
//! a pair is `s / (s + t)`. Pairs never seen together get the best product of
//! direct distances along a path ([`all_pairs_max_product`]). Pairs whose
//! distance exceeds the threshold become graph edges and the connected
//! components of that graph are the global clusters.

mod graph;
mod paths;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::{build_graph, components, MentionGraph};
pub use paths::{
    all_pairs_max_product, all_pairs_max_product_with, DirectDistances, DistanceEntry,
    MaxProductOptions, PathDistances, Provenance,
};
pub use stats::{
    accumulate_pair_stats, accumulate_pair_stats_with, direct_distance, direct_distances,
    unify_mentions, PairStat, PairStats,
};

/// Index of a [`GlobalMention`] in document order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct MentionId(pub usize);

/// Unordered mention pair stored as `(low, high)`.
pub type PairKey = (MentionId, MentionId);

pub fn pair_key(a: MentionId, b: MentionId) -> PairKey {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A mention at a document-level span, with the chunks that detected it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalMention {
    pub id: MentionId,
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub occurrences: Vec<usize>,
}

/// A set of coreferent mentions, sorted by document position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalCluster {
    pub members: Vec<MentionId>,
    pub representative: Option<MentionId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MergeError {
    #[error("chunk {chunk}: mention {start}..{end} exceeds the chunk length {len}")]
    SpanOutOfChunk {
        chunk: usize,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("clustering refers to chunk {chunk}, which does not exist")]
    UnknownChunk { chunk: usize },
}
