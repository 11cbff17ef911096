//! Prompt assembly, middle truncation and the chat-completion client.

mod client;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::text::{count_tokens, tokenize, CharIndex};

pub use client::{ask, ChatClient, LlmConfig};

/// Version of the bundled prompt templates.
pub const TEMPLATE_VERSION: &str = "v1";

const CONTEXT_TEMPLATE: &str = include_str!("../../templates/v1/context.txt");
const QUESTION_TEMPLATE: &str = include_str!("../../templates/v1/question.txt");
const CHOICE_TEMPLATE: &str = include_str!("../../templates/v1/choice.txt");
const COT_CUE: &str = include_str!("../../templates/v1/cot_cue.txt");
const CHOICE_INSTRUCTION: &str = include_str!("../../templates/v1/choice_instruction.txt");

/// Marker inserted where [`truncate_middle`] removed tokens.
pub const ELLIPSIS: &str = "…";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlmError {
    #[error("LLM configuration: {0}")]
    Config(String),
    #[error("LLM transport error: {0}")]
    Transport(String),
    #[error("LLM endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("LLM reply could not be decoded: {0}")]
    Decode(String),
}

/// Anything that completes a chat transcript. [`ChatClient`] talks to an
/// OpenAI-compatible endpoint; tests substitute canned models.
pub trait ChatModel: Send + Sync {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, LlmError>;
}

impl<T: ChatModel + ?Sized> ChatModel for std::sync::Arc<T> {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        (**self).complete(messages)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    #[default]
    Vanilla,
    Cot,
}

impl fmt::Display for PromptMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PromptMode::Vanilla => "vanilla",
            PromptMode::Cot => "cot",
        })
    }
}

impl FromStr for PromptMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vanilla" => Ok(PromptMode::Vanilla),
            "cot" => Ok(PromptMode::Cot),
            other => Err(format!(
                "unknown prompt mode `{other}` (expected vanilla | cot)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub mode: PromptMode,
    pub context: String,
    pub question: String,
    #[serde(default)]
    pub choices: Option<Vec<String>>,
}

/// Letter of the `i`-th choice (`A`, `B`, ...).
pub fn choice_letter(i: usize) -> char {
    (b'A' + (i % 26) as u8) as char
}

/// The blank-line separated parts of the user message: context, question
/// (with lettered choices), the step-by-step cue in CoT mode, and the answer
/// instruction when choices are present.
pub fn prompt_parts(spec: &PromptSpec) -> Vec<String> {
    let mut question = QUESTION_TEMPLATE.replace("{question}", spec.question.trim());
    let choices = spec.choices.as_deref().filter(|c| !c.is_empty());
    if let Some(choices) = choices {
        for (i, choice) in choices.iter().enumerate() {
            question.push('\n');
            question.push_str(
                &CHOICE_TEMPLATE
                    .replace("{letter}", &choice_letter(i).to_string())
                    .replace("{choice}", choice.trim()),
            );
        }
    }
    let mut parts = vec![
        CONTEXT_TEMPLATE.replace("{context}", &spec.context),
        question,
    ];
    if spec.mode == PromptMode::Cot {
        parts.push(COT_CUE.to_string());
    }
    if choices.is_some() {
        parts.push(CHOICE_INSTRUCTION.to_string());
    }
    parts
}

/// Renders `spec` as a single user message.
pub fn build_prompt(spec: &PromptSpec) -> Vec<ChatMessage> {
    vec![ChatMessage::user(prompt_parts(spec).join("\n\n"))]
}

/// Keeps the first `ceil(max/2)` and last `floor(max/2)` tokens of `text`
/// when it has more than `max_tokens` tokens, joined by [`ELLIPSIS`]. The
/// kept parts are copied verbatim from `text`.
pub fn truncate_middle(text: &str, max_tokens: usize) -> String {
    let tokens = tokenize(text);
    if tokens.len() <= max_tokens {
        return text.to_string();
    }
    let idx = CharIndex::new(text);
    let head = max_tokens.div_ceil(2);
    let tail = max_tokens / 2;
    let mut out = String::new();
    if head > 0 {
        out.push_str(idx.slice(text, 0, tokens[head - 1].end));
        out.push(' ');
    }
    out.push_str(ELLIPSIS);
    if tail > 0 {
        out.push(' ');
        out.push_str(idx.slice(text, tokens[tokens.len() - tail].start, idx.len()));
    }
    out
}

/// Builds the prompt for `spec`, middle-truncating the context so that the
/// whole message fits in `max_context_tokens` (the context keeps at least two
/// tokens).
pub fn prepare_prompt(spec: &PromptSpec, max_context_tokens: usize) -> Vec<ChatMessage> {
    let overhead = {
        let empty = PromptSpec {
            context: String::new(),
            ..spec.clone()
        };
        count_tokens(&prompt_parts(&empty).join("\n\n"))
    };
    // One token of slack for the ellipsis marker.
    let budget = max_context_tokens.saturating_sub(overhead + 1).max(2);
    let truncated = PromptSpec {
        context: truncate_middle(&spec.context, budget),
        ..spec.clone()
    };
    build_prompt(&truncated)
}
