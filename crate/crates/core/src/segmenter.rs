//! Sentence splitting and sentence-aligned chunking.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::text::{tokenize, CharIndex};

/// Tokens that never end a sentence even when followed by whitespace.
pub const ABBREVIATIONS: &[&str] = &[
    "Dr.", "Mr.", "Mrs.", "Ms.", "Prof.", "e.g.", "i.e.", "etc.", "vs.", "Fig.", "Eq.", "No.",
    "U.S.",
];

const TERMINATORS: &[char] = &['.', '!', '?'];
const CLOSERS: &[char] = &['"', '\'', '”', '’', ')', ']', '»'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub token_count: usize,
}

/// Splits `text` into sentences. Spans exclude surrounding whitespace.
pub fn split_sentences(text: &str) -> Vec<SentenceSpan> {
    let chars: Vec<char> = text.chars().collect();
    let idx = CharIndex::new(text);
    let mut bounds = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if start.is_none() {
            if !c.is_whitespace() {
                start = Some(i);
            } else {
                i += 1;
                continue;
            }
        }
        if TERMINATORS.contains(&c) {
            let mut j = i;
            while j < chars.len() && TERMINATORS.contains(&chars[j]) {
                j += 1;
            }
            let single_period = j == i + 1 && c == '.';
            while j < chars.len() && CLOSERS.contains(&chars[j]) {
                j += 1;
            }
            if (j == chars.len() || chars[j].is_whitespace())
                && !(single_period && ends_with_abbreviation(&chars, i + 1))
            {
                bounds.push((start.take().unwrap(), j));
            }
            i = j;
            continue;
        }
        i += 1;
    }
    if let Some(s) = start {
        let end = chars.iter().rposition(|c| !c.is_whitespace()).unwrap() + 1;
        bounds.push((s, end));
    }
    bounds
        .into_iter()
        .enumerate()
        .map(|(index, (start, end))| SentenceSpan {
            index,
            start,
            end,
            token_count: tokenize(idx.slice(text, start, end)).len(),
        })
        .collect()
}

/// Whether the whitespace-delimited word ending at `end` (exclusive) is a
/// listed abbreviation, ignoring opening brackets and quotes.
fn ends_with_abbreviation(chars: &[char], end: usize) -> bool {
    let begin = chars[..end]
        .iter()
        .rposition(|c| c.is_whitespace())
        .map_or(0, |p| p + 1);
    let word: String = chars[begin..end]
        .iter()
        .skip_while(|c| !c.is_alphanumeric())
        .collect();
    ABBREVIATIONS.contains(&word.as_str())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChunkMode {
    #[default]
    Sliding,
    NonOverlap,
}

impl fmt::Display for ChunkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChunkMode::Sliding => "sliding",
            ChunkMode::NonOverlap => "non_overlap",
        })
    }
}

impl FromStr for ChunkMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sliding" => Ok(ChunkMode::Sliding),
            "non_overlap" | "non-overlap" => Ok(ChunkMode::NonOverlap),
            other => Err(format!(
                "unknown chunk mode `{other}` (expected sliding | non_overlap)"
            )),
        }
    }
}

/// A sentence-aligned window of the document.
///
/// `start..end` covers the chunk's sentences plus the whitespace that follows
/// them, so that consecutive non-overlapping chunks tile the document. The
/// first chunk also absorbs leading whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub index: usize,
    /// First and last sentence (inclusive) touched by the chunk.
    pub sentence_range: (usize, usize),
    pub start: usize,
    pub end: usize,
    pub token_count: usize,
    /// Set when the chunk holds a piece of a sentence longer than the budget.
    pub hard_split: bool,
}

impl Chunk {
    pub fn text<'a>(&self, doc: &'a str, idx: &CharIndex) -> &'a str {
        idx.slice(doc, self.start, self.end)
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SegmentError {
    #[error("chunk token budget must be at least 1")]
    ZeroBudget,
    #[error("sentence {index} ({start}..{end}) lies outside the document")]
    SentenceOutOfBounds {
        index: usize,
        start: usize,
        end: usize,
    },
}

/// A packing unit: a whole sentence, or a budget-sized piece of an oversized
/// one.
#[derive(Debug, Clone, Copy)]
struct Unit {
    sentence: usize,
    start: usize,
    tokens: usize,
    token_offset: usize,
    piece: bool,
}

fn packing_units(
    text: &str,
    idx: &CharIndex,
    sentences: &[SentenceSpan],
    budget: usize,
) -> Result<Vec<Unit>, SegmentError> {
    let mut units = Vec::with_capacity(sentences.len());
    let mut offset = 0;
    for s in sentences {
        if s.start > s.end || s.end > idx.len() {
            return Err(SegmentError::SentenceOutOfBounds {
                index: s.index,
                start: s.start,
                end: s.end,
            });
        }
        if s.token_count <= budget {
            units.push(Unit {
                sentence: s.index,
                start: s.start,
                tokens: s.token_count,
                token_offset: offset,
                piece: false,
            });
            offset += s.token_count;
            continue;
        }
        let tokens = tokenize(idx.slice(text, s.start, s.end));
        for piece in tokens.chunks(budget) {
            units.push(Unit {
                sentence: s.index,
                start: s.start + piece[0].start,
                tokens: piece.len(),
                token_offset: offset,
                piece: true,
            });
            offset += piece.len();
        }
    }
    Ok(units)
}

/// Packs sentences into chunks of at most `budget` tokens.
///
/// Each chunk starts at a sentence and takes whole sentences while the budget
/// allows. In sliding mode the next chunk starts at the first sentence whose
/// token offset reaches the previous start plus `budget / 2`, but never past
/// the sentence right after the previous chunk. In non-overlap mode it starts
/// right after the previous chunk. A sentence longer than the budget is cut
/// into budget-sized pieces which are packed like sentences and flag their
/// chunks as `hard_split`.
pub fn chunk_document(
    text: &str,
    sentences: &[SentenceSpan],
    budget: usize,
    mode: ChunkMode,
) -> Result<Vec<Chunk>, SegmentError> {
    if budget == 0 {
        return Err(SegmentError::ZeroBudget);
    }
    let idx = CharIndex::new(text);
    let units = packing_units(text, &idx, sentences, budget)?;
    if units.is_empty() {
        return Ok(Vec::new());
    }
    let stride = budget / 2;
    let mut chunks = Vec::new();
    let mut first = 0;
    loop {
        let mut last = first;
        let mut tokens = units[first].tokens;
        while last + 1 < units.len() && tokens + units[last + 1].tokens <= budget {
            last += 1;
            tokens += units[last].tokens;
        }
        let start = if first == 0 { 0 } else { units[first].start };
        let end = units.get(last + 1).map_or(idx.len(), |u| u.start);
        chunks.push(Chunk {
            index: chunks.len(),
            sentence_range: (units[first].sentence, units[last].sentence),
            start,
            end,
            token_count: tokens,
            hard_split: units[first..=last].iter().any(|u| u.piece),
        });
        if last + 1 == units.len() {
            break;
        }
        first = match mode {
            ChunkMode::NonOverlap => last + 1,
            ChunkMode::Sliding => {
                let target = units[first].token_offset + stride;
                let next = (first + 1..=last + 1)
                    .find(|&u| units[u].token_offset >= target)
                    .unwrap_or(last + 1);
                next.max(first + 1)
            }
        };
    }
    Ok(chunks)
}
