//! Few-shot sentence decontextualization.
//!
//! Rewrites a sentence so it can be understood without its surrounding
//! context, by running it through a sequence of typed edit nodes (NP, NAME,
//! DEL, ADD) over a chat-completion backend. Each node brackets candidate
//! spans, rewrites them, and validates the result; failed substeps fall back
//! to their input. The crate also ships the evaluation harness (SARI add/del,
//! exact match, length statistics) and the corpus-preparation procedures the
//! pipeline is trained and scored on.

pub mod datasets;
pub mod gateway;
pub mod metrics;
pub mod pipeline;
pub mod prompts;
pub mod text;
pub mod validators;

pub use text::{BracketedSentence, Context, Sentence, TokenSequence};
