//! Tokenization, bracket-aware sentence types, and normalization primitives.
//!
//! Everything here is pure and immutable after construction. The tokenizer is
//! deliberately simple: lowercase, whitespace-split, with a fixed set of
//! punctuation characters broken out into their own tokens. Bracket
//! delimiters (`[` and `]`) are dropped before tokenization, so they can
//! never influence any unigram computation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Punctuation characters that tokenize as single-character tokens.
const PUNCTUATION: &[char] = &['.', ',', '!', '?', ';', ':', '\'', '"', '(', ')', '-'];

/// Bracket delimiter characters reserved for [`BracketedSentence`].
pub const OPEN_DELIM: char = '[';
pub const CLOSE_DELIM: char = ']';

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("sentence is empty after trimming")]
    EmptySentence,
    #[error("sentence contains reserved bracket delimiter {0:?}")]
    DelimiterInSentence(char),
    #[error("brackets are unbalanced or nested")]
    UnbalancedBrackets,
}

/// A raw surface-form sentence. Never contains bracket delimiters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Sentence(String);

impl Sentence {
    pub fn new(text: impl Into<String>) -> Result<Self, TextError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(TextError::EmptySentence);
        }
        for delim in [OPEN_DELIM, CLOSE_DELIM] {
            if text.contains(delim) {
                return Err(TextError::DelimiterInSentence(delim));
            }
        }
        Ok(Sentence(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The sentence with whitespace runs collapsed and ends trimmed.
    pub fn normalized(&self) -> String {
        normalize_whitespace(&self.0)
    }
}

impl TryFrom<String> for Sentence {
    type Error = TextError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Sentence::new(value)
    }
}

impl From<Sentence> for String {
    fn from(value: Sentence) -> Self {
        value.0
    }
}

impl std::fmt::Display for Sentence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Ordered context sentences, most distant first, with optional speaker labels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub sentences: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker_labels: Option<Vec<String>>,
}

impl Context {
    pub fn empty() -> Self {
        Context::default()
    }

    pub fn new(sentences: Vec<String>) -> Self {
        Context {
            sentences,
            speaker_labels: None,
        }
    }

    pub fn with_labels(sentences: Vec<String>, labels: Vec<String>) -> Self {
        debug_assert_eq!(sentences.len(), labels.len());
        Context {
            sentences,
            speaker_labels: Some(labels),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    /// One line per context sentence, `label: sentence` when labels exist.
    pub fn render(&self) -> String {
        match &self.speaker_labels {
            Some(labels) => self
                .sentences
                .iter()
                .zip(labels)
                .map(|(s, l)| format!("{l}: {s}"))
                .collect::<Vec<_>>()
                .join("\n"),
            None => self.sentences.join("\n"),
        }
    }
}

/// A sentence possibly carrying balanced, non-nested `[` `]` span markers.
///
/// Empty pairs `[]` are allowed; the ADD node inserts them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BracketedSentence(String);

impl BracketedSentence {
    pub fn new(text: impl Into<String>) -> Result<Self, TextError> {
        let text = text.into();
        check_balance(&text)?;
        if remove_delimiters(&text).trim().is_empty() {
            return Err(TextError::EmptySentence);
        }
        Ok(BracketedSentence(text))
    }

    /// Wraps a plain sentence as its trivially bracketed (zero-bracket) form.
    pub fn from_sentence(s: &Sentence) -> Self {
        BracketedSentence(s.as_str().to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn has_brackets(&self) -> bool {
        self.0.contains(OPEN_DELIM)
    }
}

impl TryFrom<String> for BracketedSentence {
    type Error = TextError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        BracketedSentence::new(value)
    }
}

impl From<BracketedSentence> for String {
    fn from(value: BracketedSentence) -> Self {
        value.0
    }
}

impl std::fmt::Display for BracketedSentence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// An ordered token list produced by [`tokenize`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl IntoIterator for TokenSequence {
    type Item = String;
    type IntoIter = std::vec::IntoIter<String>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

fn is_punct(c: char) -> bool {
    PUNCTUATION.contains(&c)
}

/// Lowercases, splits on whitespace, breaks punctuation into its own tokens.
/// Bracket delimiters are removed from the stream before anything else, so
/// they never appear in or split a token.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c == OPEN_DELIM || c == CLOSE_DELIM {
            continue;
        }
        if c.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if is_punct(c) {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            tokens.push(c.to_string());
        } else {
            current.extend(c.to_lowercase());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    TokenSequence(tokens)
}

/// Tokenizes delimiter-free text, reporting each token's char range.
/// Used internally to map bracket positions onto token indices.
fn tokenize_with_char_spans(text: &str) -> Vec<(String, usize, usize)> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0usize;
    for (i, c) in text.chars().enumerate() {
        if c.is_whitespace() {
            if !current.is_empty() {
                out.push((std::mem::take(&mut current), start, i));
            }
        } else if is_punct(c) {
            if !current.is_empty() {
                out.push((std::mem::take(&mut current), start, i));
            }
            out.push((c.to_string(), i, i + 1));
        } else {
            if current.is_empty() {
                start = i;
            }
            current.extend(c.to_lowercase());
        }
    }
    if !current.is_empty() {
        let end = text.chars().count();
        out.push((current, start, end));
    }
    out
}

fn check_balance(text: &str) -> Result<(), TextError> {
    let mut depth = 0i32;
    for c in text.chars() {
        match c {
            OPEN_DELIM => {
                depth += 1;
                if depth > 1 {
                    return Err(TextError::UnbalancedBrackets);
                }
            }
            CLOSE_DELIM => {
                depth -= 1;
                if depth < 0 {
                    return Err(TextError::UnbalancedBrackets);
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(TextError::UnbalancedBrackets);
    }
    Ok(())
}

/// Drops every bracket delimiter without touching anything else.
pub fn remove_delimiters(text: &str) -> String {
    text.chars()
        .filter(|&c| c != OPEN_DELIM && c != CLOSE_DELIM)
        .collect()
}

/// Collapses whitespace runs to single spaces and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Removes delimiters from bracketed text, returning the underlying sentence
/// (whitespace-normalized) plus the bracketed spans as token index ranges.
/// Empty pairs yield zero-length spans anchored at the insertion token index.
pub fn strip_brackets(text: &str) -> Result<(Sentence, Vec<(usize, usize)>), TextError> {
    check_balance(text)?;
    // Char positions of each delimiter within the delimiter-free text.
    let mut stripped = String::new();
    let mut stripped_chars = 0usize;
    let mut events = Vec::new();
    for c in text.chars() {
        match c {
            OPEN_DELIM => events.push((true, stripped_chars)),
            CLOSE_DELIM => events.push((false, stripped_chars)),
            _ => {
                stripped.push(c);
                stripped_chars += 1;
            }
        }
    }
    let tokens = tokenize_with_char_spans(&stripped);
    let token_at_or_after = |pos: usize, opening: bool| -> usize {
        if opening {
            // First token not fully complete before `pos`.
            tokens.iter().position(|&(_, _, end)| end > pos).unwrap_or(tokens.len())
        } else {
            // First token starting at or after `pos`.
            tokens
                .iter()
                .position(|&(_, start, _)| start >= pos)
                .unwrap_or(tokens.len())
        }
    };
    let mut spans = Vec::new();
    let mut open_at = None;
    for (is_open, pos) in events {
        if is_open {
            open_at = Some(token_at_or_after(pos, true));
        } else {
            let start = open_at.take().expect("balance checked above");
            let end = token_at_or_after(pos, false);
            spans.push((start, end.max(start)));
        }
    }
    let sentence = Sentence::new(normalize_whitespace(&stripped))?;
    Ok((sentence, spans))
}

/// Deduplicated token set.
pub fn unigram_set(tokens: &TokenSequence) -> BTreeSet<String> {
    tokens.tokens().iter().cloned().collect()
}

/// Tokenizes and drops punctuation and stopword tokens, preserving order.
pub fn normalize_for_match(text: &str, stopwords: &BTreeSet<String>) -> TokenSequence {
    let kept = tokenize(text)
        .into_iter()
        .filter(|t| !(t.chars().all(is_punct) || stopwords.contains(t)))
        .collect();
    TokenSequence(kept)
}

/// The shipped English function-word list: one token per line, `#` comments.
const STOPWORDS_FILE: &str = include_str!("stopwords.txt");

/// Parses a stopword list in the shipped file format.
pub fn parse_stopwords(data: &str) -> BTreeSet<String> {
    data.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

/// The default stopword list embedded in the crate.
pub fn default_stopwords() -> BTreeSet<String> {
    parse_stopwords(STOPWORDS_FILE)
}
