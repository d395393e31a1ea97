//! The instruction catalog for every LLM call the crate makes.
//!
//! Rendering (the `Context:`/`Sentence:` labels, message alternation) is
//! fixed and versioned: response-cache keys and mock scripts depend on the
//! rendered bytes, so any change here must bump [`CATALOG_VERSION`].

use crate::pipeline::EditType;

/// Bump whenever any instruction text or rendering rule changes.
pub const CATALOG_VERSION: &str = "v1";

pub const BRACKET_NP: &str = "Given a sentence, put brackets around any personal pronouns, \
definite pronouns, and definite noun phrases that can be replaced with more specific \
expressions. If there are none, give the original sentence.";

pub const BRACKET_NAME: &str = "Given a sentence, put brackets around any acronyms, nominative \
pronouns, or proper names that can be replaced with more specific expressions. If there are \
none, give the original sentence.";

pub const BRACKET_DEL: &str = "Given a sentence, put brackets around any discourse markers and \
connectives that can only be understood in context. If there are none, give the original \
sentence.";

pub const BRACKET_ADD: &str = "Given a sentence, insert empty brackets wherever additional \
modifiers should be added in order to allow the sentence to be interpretable without context. \
If there is no need for modifiers, give the original sentence.";

pub const REPLACE_NP: &str = "Given a context and a sentence, replace any bracketed expressions \
in the sentence with a more explicit referring expression from the context or general \
knowledge. If there are no bracketed expressions, do nothing.";

pub const REPLACE_NAME: &str = "Given a context and a sentence, replace any bracketed \
expressions in the sentence with a more explicit referring expression from the context or \
general knowledge. If there are no bracketed expressions, do nothing.";

pub const REPLACE_DEL: &str = "Given a context and a sentence, remove any bracketed expressions \
if they are extraneous or require context to interpret. If there are no bracketed expressions \
or if there is no need to make any changes, do nothing.";

pub const REPLACE_ADD: &str = "Given a context and a sentence, replace any bracketed \
expressions (which may be empty) with additional modifiers from the context or general \
knowledge that make the sentence more explicit. If there are no bracketed expressions or if \
there is no need to make any changes, do nothing. Do not change any content except for \
replacing brackets.";

pub const CUTOFF_CHECK: &str = "Given a context and a sentence, decide whether the meaning of \
the sentence can be understood without the context. Answer \"True\" if the sentence can be \
understood without context, and \"False\" otherwise.";

pub const CONVERSATION_CLEANING: &str = "Given an annotated conversation between two people, \
clean the conversation by removing all annotations and backchannels.";

pub const QUALITY_RATING: &str = "Given a sentence and context sentences, provide a numerical \
quality rating between 1 (worst quality) and 5 (best quality) based on the following criteria:\n\
- Whether every sentence is fluent and natural.\n\
- Whether the sentences have interesting content.\n\
- Whether the sentence can be understood given the provided context.\n\
Do not give an explanation. Just give a single integer between 1 and 5.";

/// Default bracket-substep instruction for an edit type.
pub fn bracket_prompt(edit_type: EditType) -> &'static str {
    match edit_type {
        EditType::Np => BRACKET_NP,
        EditType::Name => BRACKET_NAME,
        EditType::Del => BRACKET_DEL,
        EditType::Add => BRACKET_ADD,
    }
}

/// Default replace-substep instruction for an edit type.
pub fn replace_prompt(edit_type: EditType) -> &'static str {
    match edit_type {
        EditType::Np => REPLACE_NP,
        EditType::Name => REPLACE_NAME,
        EditType::Del => REPLACE_DEL,
        EditType::Add => REPLACE_ADD,
    }
}
