use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

use super::{pair_key, GlobalMention, MentionId, MergeError, PairKey};
use crate::par::Execution;
use crate::resolver::LocalClustering;
use crate::segmenter::Chunk;

/// Agreement votes for one mention pair (`a < b`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairStat {
    pub a: MentionId,
    pub b: MentionId,
    /// Chunks where both were detected and shared a cluster.
    pub s: u32,
    /// Chunks where both were detected but did not share a cluster.
    pub t: u32,
}

pub type PairStats = BTreeMap<PairKey, PairStat>;

fn chunk_of<'a>(
    chunks: &'a [Chunk],
    clustering: &LocalClustering,
) -> Result<&'a Chunk, MergeError> {
    chunks
        .get(clustering.chunk_index)
        .filter(|c| c.index == clustering.chunk_index)
        .ok_or(MergeError::UnknownChunk {
            chunk: clustering.chunk_index,
        })
}

/// Lifts chunk-local mentions to document spans, merging identical spans.
/// The result is sorted by `(start, end)` and `id` is the position in it.
pub fn unify_mentions(
    clusterings: &[LocalClustering],
    chunks: &[Chunk],
) -> Result<Vec<GlobalMention>, MergeError> {
    let mut spans: BTreeMap<(usize, usize), (String, Vec<usize>)> = BTreeMap::new();
    for clustering in clusterings {
        let chunk = chunk_of(chunks, clustering)?;
        for m in &clustering.mentions {
            if m.start >= m.end || m.end > chunk.len() {
                return Err(MergeError::SpanOutOfChunk {
                    chunk: chunk.index,
                    start: m.start,
                    end: m.end,
                    len: chunk.len(),
                });
            }
            let entry = spans
                .entry((chunk.start + m.start, chunk.start + m.end))
                .or_insert_with(|| (m.surface.clone(), Vec::new()));
            if !entry.1.contains(&chunk.index) {
                entry.1.push(chunk.index);
            }
        }
    }
    Ok(spans
        .into_iter()
        .enumerate()
        .map(|(i, ((start, end), (surface, mut occurrences)))| {
            occurrences.sort_unstable();
            GlobalMention {
                id: MentionId(i),
                start,
                end,
                surface,
                occurrences,
            }
        })
        .collect())
}

/// Votes cast by one chunk: every co-present pair exactly once, `true` when
/// the chunk puts both mentions in the same cluster.
fn chunk_votes(
    clustering: &LocalClustering,
    chunk: &Chunk,
    ids: &HashMap<(usize, usize), MentionId>,
) -> Vec<(PairKey, bool)> {
    let mut labels = vec![None; clustering.mentions.len()];
    for (c, members) in clustering.clusters.iter().enumerate() {
        for &m in members {
            labels[m] = Some(c);
        }
    }
    // A span reported twice in one chunk still counts once.
    let mut present: BTreeMap<MentionId, Option<usize>> = BTreeMap::new();
    for (m, label) in clustering.mentions.iter().zip(labels) {
        if let Some(&id) = ids.get(&(chunk.start + m.start, chunk.start + m.end)) {
            let slot = present.entry(id).or_insert(label);
            if slot.is_none() {
                *slot = label;
            }
        }
    }
    let present: Vec<(MentionId, Option<usize>)> = present.into_iter().collect();
    let mut votes = Vec::with_capacity(present.len() * present.len().saturating_sub(1) / 2);
    for (i, &(a, la)) in present.iter().enumerate() {
        for &(b, lb) in &present[i + 1..] {
            votes.push(((a, b), la.is_some() && la == lb));
        }
    }
    votes
}

/// Counts `s`/`t` votes over all chunks. Pairs never co-present are absent.
pub fn accumulate_pair_stats(
    clusterings: &[LocalClustering],
    chunks: &[Chunk],
    mentions: &[GlobalMention],
) -> Result<PairStats, MergeError> {
    accumulate_pair_stats_with(clusterings, chunks, mentions, Execution::Sequential)
}

/// [`accumulate_pair_stats`] with per-chunk votes computed under `exec`.
pub fn accumulate_pair_stats_with(
    clusterings: &[LocalClustering],
    chunks: &[Chunk],
    mentions: &[GlobalMention],
    exec: Execution,
) -> Result<PairStats, MergeError> {
    let ids: HashMap<(usize, usize), MentionId> =
        mentions.iter().map(|m| ((m.start, m.end), m.id)).collect();
    let paired: Vec<(&LocalClustering, &Chunk)> = clusterings
        .iter()
        .map(|c| chunk_of(chunks, c).map(|chunk| (c, chunk)))
        .collect::<Result<_, _>>()?;
    let partial = exec.map(&paired, |(clustering, chunk)| {
        chunk_votes(clustering, chunk, &ids)
    });
    let mut stats = PairStats::new();
    for (key, same) in partial.into_iter().flatten() {
        let (a, b) = pair_key(key.0, key.1);
        let stat = stats.entry((a, b)).or_insert(PairStat { a, b, s: 0, t: 0 });
        if same {
            stat.s += 1;
        } else {
            stat.t += 1;
        }
    }
    Ok(stats)
}

/// `s / (s + t)`.
///
/// Panics when the pair has no votes; such pairs never appear in
/// [`PairStats`].
pub fn direct_distance(stat: &PairStat) -> f64 {
    let total = stat.s + stat.t;
    assert!(total > 0, "pair {:?}-{:?} has no votes", stat.a, stat.b);
    f64::from(stat.s) / f64::from(total)
}

pub fn direct_distances(stats: &PairStats) -> BTreeMap<PairKey, f64> {
    stats
        .iter()
        .map(|(k, s)| (*k, direct_distance(s)))
        .collect()
}
