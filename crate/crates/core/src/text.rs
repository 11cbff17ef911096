//! Code point offsets and the token rule shared by chunking, mention
//! detection and prompt truncation.
//!
//! A token is a whitespace-delimited word with its leading and trailing
//! punctuation split off: `"(Alice),"` yields `(`, `Alice`, `),`. A piece made
//! only of punctuation is a single token.

use serde::{Deserialize, Serialize};

/// Maps code point offsets to byte offsets for one string.
#[derive(Debug, Clone)]
pub struct CharIndex {
    bytes: Vec<usize>,
}

impl CharIndex {
    pub fn new(text: &str) -> Self {
        let mut bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bytes.push(text.len());
        Self { bytes }
    }

    /// Number of code points in the indexed string.
    pub fn len(&self) -> usize {
        self.bytes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Byte offset of code point `pos`; `pos == len()` maps to the end.
    pub fn byte(&self, pos: usize) -> usize {
        self.bytes[pos]
    }

    /// Code point offset of a byte offset that lies on a char boundary.
    pub fn char_of_byte(&self, byte: usize) -> usize {
        self.bytes
            .binary_search(&byte)
            .expect("byte offset is not on a char boundary")
    }

    pub fn slice<'a>(&self, text: &'a str, start: usize, end: usize) -> &'a str {
        &text[self.bytes[start]..self.bytes[end]]
    }
}

/// Number of code points in `text`.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Word,
    Punct,
}

/// A token with code point offsets into the tokenized text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

impl Token {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

pub(crate) fn is_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

/// Splits `text` under the token rule.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        split_piece(&chars[start..i], start, &mut tokens);
    }
    tokens
}

fn split_piece(piece: &[char], offset: usize, out: &mut Vec<Token>) {
    let lead = piece.iter().take_while(|c| is_punct(**c)).count();
    if lead == piece.len() {
        out.push(Token {
            start: offset,
            end: offset + piece.len(),
            kind: TokenKind::Punct,
        });
        return;
    }
    let trail = piece.iter().rev().take_while(|c| is_punct(**c)).count();
    let core_start = offset + lead;
    let core_end = offset + piece.len() - trail;
    if lead > 0 {
        out.push(Token {
            start: offset,
            end: core_start,
            kind: TokenKind::Punct,
        });
    }
    out.push(Token {
        start: core_start,
        end: core_end,
        kind: TokenKind::Word,
    });
    if trail > 0 {
        out.push(Token {
            start: core_end,
            end: offset + piece.len(),
            kind: TokenKind::Punct,
        });
    }
}

/// Token count of `text` under the token rule.
pub fn count_tokens(text: &str) -> usize {
    tokenize(text).len()
}

/// Case-folds and collapses internal whitespace.
pub fn normalize_surface(surface: &str) -> String {
    surface
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(text: &str) -> Vec<String> {
        let idx = CharIndex::new(text);
        tokenize(text)
            .iter()
            .map(|t| idx.slice(text, t.start, t.end).to_string())
            .collect()
    }

    #[test]
    fn punctuation_is_split_off() {
        assert_eq!(
            words("(Alice), said hi."),
            ["(", "Alice", "),", "said", "hi", "."]
        );
        assert_eq!(words("e.g. U.S."), ["e.g", ".", "U.S", "."]);
        assert_eq!(words("... !"), ["...", "!"]);
        assert_eq!(count_tokens(""), 0);
        assert_eq!(count_tokens("   "), 0);
    }

    #[test]
    fn offsets_are_code_points() {
        let text = "Zoë  naïve…";
        let toks = tokenize(text);
        assert_eq!(
            toks[0],
            Token {
                start: 0,
                end: 3,
                kind: TokenKind::Word
            }
        );
        assert_eq!(
            toks[1],
            Token {
                start: 5,
                end: 10,
                kind: TokenKind::Word
            }
        );
        assert_eq!(
            toks[2],
            Token {
                start: 10,
                end: 11,
                kind: TokenKind::Punct
            }
        );
        let idx = CharIndex::new(text);
        assert_eq!(idx.len(), 11);
        assert_eq!(idx.slice(text, 5, 10), "naïve");
        assert_eq!(idx.char_of_byte(idx.byte(10)), 10);
    }

    #[test]
    fn normalization_folds_case_and_spaces() {
        assert_eq!(normalize_surface("  Dr.   Smith "), "dr. smith");
    }
}
