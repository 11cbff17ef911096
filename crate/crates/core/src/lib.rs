//! Long-context coreference adaptation.
//!
//! The crate turns a long document into a coreference-normalized document in
//! five stages:
//!
//! 1. [`segmenter`] splits the text into sentences and packs them into
//!    sentence-aligned, token-bounded chunks (sliding or non-overlapping).
//! 2. [`resolver`] clusters mentions inside every chunk, using the builtin
//!    rule resolver, a remote model server, or an LLM.
//! 3. [`merge`] lifts chunk-local clusters to document-global mentions,
//!    scores every co-present pair, propagates scores along max-product
//!    paths and cuts the resulting graph at a threshold.
//! 4. [`representative`] picks the most frequent non-pronoun surface of each
//!    global cluster.
//! 5. [`rewriter`] substitutes that surface for the other members.
//!
//! [`qa`] and [`eval`] feed the rewritten context to a chat-completion model
//! and score the answers. [`pipeline::Pipeline`] wires stages 1-5 together.
//!
//! Offsets exposed by every public type are Unicode code point offsets.

pub mod eval;
mod http;
pub mod merge;
pub mod par;
pub mod pipeline;
pub mod qa;
pub mod representative;
pub mod resolver;
pub mod rewriter;
pub mod segmenter;
pub mod synth;
pub mod text;

pub use http::RetryPolicy;
pub use par::Execution;
pub use pipeline::{Analysis, Pipeline, PipelineConfig, PipelineError};
