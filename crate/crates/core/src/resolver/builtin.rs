//! Deterministic rule resolver.
//!
//! Mentions are pronouns from the lexicon plus maximal runs of capitalized
//! words (a title such as `Dr.` continues a run across its period). At the
//! start of a sentence, leading function words that are capitalized only by
//! position (`The`, `In`, `However`, ...) are trimmed off a run; a run made
//! only of such words is not a mention.
//!
//! Clusters: non-pronoun mentions with the same case-folded surface are
//! merged, and every pronoun joins the nearest preceding non-pronoun mention
//! in the chunk. A pronoun with no such mention stays a singleton.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::{ChunkResolver, LocalClustering, LocalMention, ResolveError};
use crate::representative::is_pronoun_word;
use crate::segmenter::split_sentences;
use crate::text::{normalize_surface, tokenize, CharIndex, Token, TokenKind};

/// Case-folded words trimmed from the front of a sentence-initial run.
pub const SENTENCE_INITIAL_STOPWORDS: &[&str] = &[
    "a",
    "about",
    "after",
    "afterwards",
    "again",
    "all",
    "also",
    "although",
    "an",
    "and",
    "another",
    "as",
    "at",
    "because",
    "before",
    "both",
    "but",
    "by",
    "during",
    "each",
    "even",
    "eventually",
    "every",
    "finally",
    "for",
    "from",
    "here",
    "how",
    "however",
    "if",
    "in",
    "indeed",
    "instead",
    "into",
    "later",
    "many",
    "maybe",
    "meanwhile",
    "most",
    "nevertheless",
    "next",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "on",
    "once",
    "one",
    "or",
    "over",
    "perhaps",
    "since",
    "so",
    "some",
    "soon",
    "still",
    "suddenly",
    "the",
    "then",
    "there",
    "therefore",
    "though",
    "thus",
    "to",
    "today",
    "tomorrow",
    "under",
    "until",
    "upon",
    "what",
    "when",
    "where",
    "while",
    "why",
    "with",
    "without",
    "yesterday",
    "yet",
];

const TITLES: &[&str] = &["Dr", "Mr", "Mrs", "Ms", "Prof"];

struct Detected {
    start: usize,
    end: usize,
    pronoun: bool,
}

fn is_capitalized(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

fn detect_mentions(text: &str) -> Vec<Detected> {
    let idx = CharIndex::new(text);
    let tokens: Vec<Token> = tokenize(text);
    let word = |i: usize| idx.slice(text, tokens[i].start, tokens[i].end);

    let mut sentence_initial = HashSet::new();
    for s in split_sentences(text) {
        if let Some(i) = tokens
            .iter()
            .position(|t| t.kind == TokenKind::Word && t.start >= s.start && t.start < s.end)
        {
            sentence_initial.insert(i);
        }
    }

    let mut found = Vec::new();
    let mut run: Vec<usize> = Vec::new();
    let flush = |run: &mut Vec<usize>, found: &mut Vec<Detected>| {
        let mut first = 0;
        if sentence_initial.contains(&run.first().copied().unwrap_or(usize::MAX)) {
            while first < run.len()
                && SENTENCE_INITIAL_STOPWORDS.contains(&word(run[first]).to_lowercase().as_str())
            {
                first += 1;
            }
        }
        if first < run.len() {
            found.push(Detected {
                start: tokens[run[first]].start,
                end: tokens[*run.last().unwrap()].end,
                pronoun: false,
            });
        }
        run.clear();
    };

    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Word {
            continue;
        }
        let w = word(i);
        if is_pronoun_word(w) {
            flush(&mut run, &mut found);
            found.push(Detected {
                start: tok.start,
                end: tok.end,
                pronoun: true,
            });
        } else if is_capitalized(w) {
            let connected = run.last().is_some_and(|&j| {
                i == j + 1
                    || (i == j + 2
                        && TITLES.contains(&word(j))
                        && idx.slice(text, tokens[j + 1].start, tokens[j + 1].end) == ".")
            });
            if !connected {
                flush(&mut run, &mut found);
            }
            run.push(i);
        } else {
            flush(&mut run, &mut found);
        }
    }
    flush(&mut run, &mut found);
    found.sort_by_key(|d| (d.start, d.end));
    found
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = x;
    while parent[cur] != root {
        cur = std::mem::replace(&mut parent[cur], root);
    }
    root
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Runs the rule resolver over one chunk. Pure: equal input, equal output.
pub fn builtin_resolve(chunk_text: &str) -> LocalClustering {
    let idx = CharIndex::new(chunk_text);
    let detected = detect_mentions(chunk_text);
    let mentions: Vec<LocalMention> = detected
        .iter()
        .map(|d| LocalMention {
            start: d.start,
            end: d.end,
            surface: idx.slice(chunk_text, d.start, d.end).to_string(),
        })
        .collect();

    let mut parent: Vec<usize> = (0..mentions.len()).collect();
    let mut by_surface: HashMap<String, usize> = HashMap::new();
    let mut last_named: Option<usize> = None;
    for (i, d) in detected.iter().enumerate() {
        if d.pronoun {
            if let Some(antecedent) = last_named {
                union(&mut parent, antecedent, i);
            }
        } else {
            let first = *by_surface
                .entry(normalize_surface(&mentions[i].surface))
                .or_insert(i);
            union(&mut parent, first, i);
            last_named = Some(i);
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..mentions.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    LocalClustering {
        chunk_index: 0,
        mentions,
        clusters: groups.into_values().collect(),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinResolver;

impl ChunkResolver for BuiltinResolver {
    fn resolve(
        &self,
        chunk_index: usize,
        chunk_text: &str,
    ) -> Result<LocalClustering, ResolveError> {
        Ok(LocalClustering {
            chunk_index,
            ..builtin_resolve(chunk_text)
        })
    }
}
