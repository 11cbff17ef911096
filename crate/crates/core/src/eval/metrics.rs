use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::qa::choice_letter;

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

fn f_measure(overlap: usize, predicted: usize, reference: usize) -> f64 {
    if overlap == 0 || predicted == 0 || reference == 0 {
        return 0.0;
    }
    let p = overlap as f64 / predicted as f64;
    let r = overlap as f64 / reference as f64;
    2.0 * p * r / (p + r)
}

/// LCS-based F-measure over case-folded alphanumeric tokens.
pub fn rouge_l(prediction: &str, reference: &str) -> f64 {
    let (p, r) = (words(prediction), words(reference));
    f_measure(lcs_len(&p, &r), p.len(), r.len())
}

/// Case-folds, drops punctuation and the articles `a`, `an`, `the`.
pub fn normalize_answer(text: &str) -> Vec<String> {
    let stripped: String = text
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    stripped
        .split_whitespace()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .map(String::from)
        .collect()
}

fn token_f1(prediction: &[String], gold: &[String]) -> f64 {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for w in gold {
        *counts.entry(w).or_default() += 1;
    }
    let mut common = 0;
    for w in prediction {
        if let Some(n) = counts.get_mut(w.as_str()) {
            if *n > 0 {
                *n -= 1;
                common += 1;
            }
        }
    }
    f_measure(common, prediction.len(), gold.len())
}

/// Best bag-of-tokens F1 of `prediction` against any of `golds`.
pub fn qa_f1(prediction: &str, golds: &[String]) -> f64 {
    let p = normalize_answer(prediction);
    golds
        .iter()
        .map(|g| token_f1(&p, &normalize_answer(g)))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChoiceScore {
    pub score: f64,
    pub extracted: Option<char>,
    /// No choice letter could be found in the response.
    pub unparsed: bool,
}

/// First standalone choice letter among the first `choice_count` letters,
/// upper-cased.
///
/// A letter is standalone when no letter or digit touches it. Skipped: a
/// letter after an apostrophe (`I'd`), a letter followed by `.` and another
/// letter (`e.g.`), and `a`/`A` followed by a space and a lowercase word,
/// which reads as an article.
pub fn extract_choice(response: &str, choice_count: usize) -> Option<char> {
    let allowed: Vec<char> = (0..choice_count.clamp(1, 26)).map(choice_letter).collect();
    let chars: Vec<char> = response.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        let upper = c.to_ascii_uppercase();
        if !c.is_ascii_alphabetic() || !allowed.contains(&upper) {
            continue;
        }
        let prev = i.checked_sub(1).map(|j| chars[j]);
        let next = chars.get(i + 1).copied();
        if prev.is_some_and(|p| p.is_alphanumeric() || p == '\'' || p == '’') {
            continue;
        }
        if next.is_some_and(char::is_alphanumeric) {
            continue;
        }
        if next == Some('.') && chars.get(i + 2).is_some_and(|n| n.is_alphabetic()) {
            continue;
        }
        if upper == 'A' && next.is_some_and(char::is_whitespace) {
            let following = chars[i + 1..].iter().find(|ch| !ch.is_whitespace());
            if following.is_some_and(|ch| ch.is_lowercase()) {
                continue;
            }
        }
        return Some(upper);
    }
    None
}

/// 1 when the extracted letter equals `gold` (case-insensitive), else 0.
pub fn choice_accuracy(prediction: &str, gold: &str, choice_count: usize) -> ChoiceScore {
    let extracted = extract_choice(prediction, choice_count);
    let gold = extract_choice(gold.trim(), 26);
    ChoiceScore {
        score: if extracted.is_some() && extracted == gold {
            1.0
        } else {
            0.0
        },
        extracted,
        unparsed: extracted.is_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golds(g: &[&str]) -> Vec<String> {
        g.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rouge_examples() {
        assert_eq!(rouge_l("the cat sat", "the cat sat"), 1.0);
        assert!((rouge_l("a b c d", "a c d") - 6.0 / 7.0).abs() < 1e-12);
        assert_eq!(rouge_l("x y", "p q"), 0.0);
        assert_eq!(rouge_l("", "p q"), 0.0);
        assert_eq!(rouge_l("p q", ""), 0.0);
    }

    #[test]
    fn f1_examples() {
        assert!((qa_f1("Barack Obama", &golds(&["Obama"])) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(qa_f1("The Eiffel Tower!", &golds(&["eiffel tower"])), 1.0);
        assert_eq!(qa_f1("", &golds(&["Obama"])), 0.0);
        assert_eq!(qa_f1("Paris", &golds(&["Rome", "paris"])), 1.0);
        assert_eq!(qa_f1("a an the", &golds(&["the"])), 0.0);
    }

    #[test]
    fn f1_counts_repeats_as_a_bag() {
        // pred {x, x, y}, gold {x, y, z}: overlap 2
        assert!((qa_f1("x x y", &golds(&["x y z"])) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn choice_letters() {
        assert_eq!(extract_choice("The answer is B.", 4), Some('B'));
        assert_eq!(extract_choice("b)", 4), Some('B'));
        assert_eq!(extract_choice("A cat, so C", 4), Some('C'));
        assert_eq!(extract_choice("I'd pick d", 4), Some('D'));
        assert_eq!(extract_choice("e.g. B", 5), Some('B'));
        assert_eq!(extract_choice("E", 4), None);
        assert_eq!(extract_choice("nothing here", 4), None);
    }
}
