//! Seeded synthetic documents for tests and benchmarks.
//!
//! Every document opens with a named entity. A pronoun always has a name
//! earlier in its own sentence or in the sentence before, so the builtin
//! resolver finds an antecedent for each one whenever adjacent sentences
//! share a chunk. Names and pronouns are always separated by lowercase
//! words, so rewriting never glues two capitalized runs together.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub const NAMES: &[&str] = &[
    "Alice",
    "Bob",
    "Carol",
    "Dr. Jane Smith",
    "Mr. Gray",
    "Zoë",
    "Omar",
    "Prof. Lee",
];

const SUBJECT_PRONOUNS: &[&str] = &["she", "he", "they", "it"];
const OBJECT_PRONOUNS: &[&str] = &["her", "him", "them", "it"];
const VERBS: &[&str] = &[
    "visited",
    "painted",
    "found",
    "watched",
    "repaired",
    "sold",
    "carried",
    "described",
];
const OBJECTS: &[&str] = &[
    "the old bridge",
    "a small boat",
    "the garden wall",
    "an empty house",
    "the market square",
    "a red kite",
];
const TAILS: &[&str] = &["today", "again", "at dawn", "slowly", "near the river"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub sentences: usize,
    /// How many of [`NAMES`] the document draws from.
    pub entities: usize,
    /// Chance that a sentence refers back with a pronoun.
    pub pronoun_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            sentences: 40,
            entities: 4,
            pronoun_rate: 0.5,
        }
    }
}

fn pick<'a>(rng: &mut StdRng, items: &[&'a str]) -> &'a str {
    items.choose(rng).copied().unwrap()
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    chars
        .next()
        .map(|c| c.to_uppercase().chain(chars).collect())
        .unwrap_or_default()
}

/// Deterministic document for `seed`.
pub fn document(seed: u64, config: &SynthConfig) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    let names = &NAMES[..config.entities.clamp(1, NAMES.len())];
    let mut sentences = Vec::with_capacity(config.sentences);
    let mut previous_named = false;
    for _ in 0..config.sentences {
        let name = pick(&mut rng, names);
        let verb = pick(&mut rng, VERBS);
        let object = pick(&mut rng, OBJECTS);
        let tail = pick(&mut rng, TAILS);
        let refer = previous_named && rng.gen_bool(config.pronoun_rate);
        let template = rng.gen_range(0..3);
        previous_named = !refer || template == 1;
        let sentence = match (refer, template) {
            (false, 0) => format!("{name} {verb} {object} {tail}."),
            (false, 1) => format!("Later {name} {verb} {object}."),
            (false, _) => {
                let other = pick(&mut rng, names);
                format!("{name} {verb} {object} with {other} {tail}.")
            }
            (true, 0) => {
                let p = pick(&mut rng, SUBJECT_PRONOUNS);
                format!("{} {verb} {object} {tail}.", capitalize(p))
            }
            (true, 1) => {
                let p = pick(&mut rng, OBJECT_PRONOUNS);
                format!("{name} {verb} {object} for {p} {tail}.")
            }
            (true, _) => {
                let p = pick(&mut rng, SUBJECT_PRONOUNS);
                format!("Then {p} {verb} {object}.")
            }
        };
        sentences.push(sentence);
    }
    sentences.join(" ")
}
