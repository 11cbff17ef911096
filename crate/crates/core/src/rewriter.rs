//! Mention replacement.
//!
//! [`plan_edits`] turns global clusters into non-overlapping replacement
//! edits and [`apply_edits`] splices them into the text in one pass, keeping
//! an [`OffsetMap`] from original to rewritten positions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::merge::{GlobalCluster, GlobalMention};
use crate::segmenter::SentenceSpan;
use crate::text::{tokenize, CharIndex, TokenKind};

/// Replace `start..end` (original code point offsets) with `replacement`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub replacement: String,
    /// Index of the cluster in the analysis.
    pub cluster: usize,
}

impl Edit {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    fn overlaps(&self, other: &Edit) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Sorted, pairwise disjoint edits plus the candidates lost to overlaps.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditPlan {
    pub edits: Vec<Edit>,
    pub dropped: Vec<Edit>,
}

/// Start offsets of the first word of every sentence.
pub fn sentence_initial_positions(text: &str, sentences: &[SentenceSpan]) -> Vec<usize> {
    let tokens = tokenize(text);
    let mut out = Vec::with_capacity(sentences.len());
    let mut i = 0;
    for s in sentences {
        while i < tokens.len() && tokens[i].start < s.start {
            i += 1;
        }
        if let Some(t) = tokens[i..]
            .iter()
            .take_while(|t| t.start < s.end)
            .find(|t| t.kind == TokenKind::Word)
        {
            out.push(t.start);
        }
    }
    out
}

fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_lowercase() => c.to_uppercase().chain(chars).collect(),
        _ => s.to_string(),
    }
}

/// Plans the replacements for `clusters`: every member whose text differs
/// from its cluster's representative surface gets one candidate edit, and
/// among overlapping candidates the longest span wins (earliest start on
/// ties). Clusters without a representative are left alone. A replacement
/// at a sentence start (per `sentence_starts`, sorted) gets a leading
/// capital.
pub fn plan_edits(
    clusters: &[GlobalCluster],
    mentions: &[GlobalMention],
    sentence_starts: &[usize],
) -> EditPlan {
    let mut candidates = Vec::new();
    for (ci, cluster) in clusters.iter().enumerate() {
        let Some(rep) = cluster.representative else {
            continue;
        };
        let surface = &mentions[rep.0].surface;
        for &id in &cluster.members {
            if id == rep {
                continue;
            }
            let m = &mentions[id.0];
            let replacement = if sentence_starts.binary_search(&m.start).is_ok() {
                capitalize_first(surface)
            } else {
                surface.clone()
            };
            if replacement != m.surface {
                candidates.push(Edit {
                    start: m.start,
                    end: m.end,
                    replacement,
                    cluster: ci,
                });
            }
        }
    }

    candidates.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(a.start.cmp(&b.start))
            .then(a.cluster.cmp(&b.cluster))
    });
    let mut plan = EditPlan::default();
    for c in candidates {
        if plan.edits.iter().any(|e| e.overlaps(&c)) {
            plan.dropped.push(c);
        } else {
            plan.edits.push(c);
        }
    }
    plan.edits.sort_by_key(|e| e.start);
    plan.dropped.sort_by_key(|e| (e.start, e.end));
    plan
}

/// One replaced region: `original` in the input became `rewritten`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splice {
    pub original: (usize, usize),
    pub rewritten: (usize, usize),
}

/// Monotone map from original to rewritten code point positions.
///
/// Positions outside every splice shift by the accumulated length delta; a
/// position inside a splice maps to the start of its replacement.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OffsetMap {
    pub original_len: usize,
    pub rewritten_len: usize,
    pub splices: Vec<Splice>,
}

impl OffsetMap {
    pub fn identity(len: usize) -> Self {
        Self {
            original_len: len,
            rewritten_len: len,
            splices: Vec::new(),
        }
    }

    /// Rewritten position of original position `pos` (`0..=original_len`).
    pub fn map(&self, pos: usize) -> usize {
        // Splices ending at or before `pos`, insertions at `pos` included.
        let i = self.splices.partition_point(|s| s.original.1 <= pos);
        if let Some(s) = self.splices.get(i) {
            if s.original.0 <= pos {
                return s.rewritten.0;
            }
        }
        match i.checked_sub(1).map(|j| &self.splices[j]) {
            None => pos,
            Some(s) => s.rewritten.1 + (pos - s.original.1),
        }
    }

    /// Whether original position `pos` lies inside a replaced region.
    pub fn is_edited(&self, pos: usize) -> bool {
        let i = self.splices.partition_point(|s| s.original.1 <= pos);
        self.splices
            .get(i)
            .is_some_and(|s| s.original.0 <= pos && pos < s.original.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteResult {
    pub text: String,
    pub offset_map: OffsetMap,
    pub applied: usize,
    pub dropped: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("edit {start}..{end} overlaps or precedes the previous edit ending at {previous_end}")]
    Overlap {
        start: usize,
        end: usize,
        previous_end: usize,
    },
    #[error("edit {start}..{end} lies outside the text of length {len}")]
    OutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },
}

/// Splices sorted, disjoint `edits` into `text`.
pub fn apply_edits(text: &str, edits: &[Edit]) -> Result<RewriteResult, RewriteError> {
    let idx = CharIndex::new(text);
    let len = idx.len();
    let mut out = String::with_capacity(text.len());
    let mut splices = Vec::with_capacity(edits.len());
    let mut cursor = 0;
    let mut written = 0;
    for e in edits {
        if e.start > e.end || e.end > len {
            return Err(RewriteError::OutOfBounds {
                start: e.start,
                end: e.end,
                len,
            });
        }
        if e.start < cursor {
            return Err(RewriteError::Overlap {
                start: e.start,
                end: e.end,
                previous_end: cursor,
            });
        }
        out.push_str(idx.slice(text, cursor, e.start));
        written += e.start - cursor;
        out.push_str(&e.replacement);
        let new_len = e.replacement.chars().count();
        splices.push(Splice {
            original: (e.start, e.end),
            rewritten: (written, written + new_len),
        });
        written += new_len;
        cursor = e.end;
    }
    out.push_str(idx.slice(text, cursor, len));
    written += len - cursor;
    Ok(RewriteResult {
        text: out,
        offset_map: OffsetMap {
            original_len: len,
            rewritten_len: written,
            splices,
        },
        applied: edits.len(),
        dropped: 0,
    })
}
