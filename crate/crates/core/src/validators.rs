//! Deterministic acceptance checks applied to every substep output.
//!
//! Two checks exist: bracketing must reproduce the input sentence exactly
//! (apart from the delimiters themselves), and replacements must keep enough
//! lexical overlap with the input, measured by unigram Jaccard similarity.
//! Malformed model output is a rejection verdict, never an error.

use serde::{Deserialize, Serialize};

use crate::text::{
    normalize_whitespace, remove_delimiters, strip_brackets, tokenize, unigram_set,
    BracketedSentence, Sentence,
};

/// Default similarity tolerance for the replace substep.
pub const DEFAULT_JACCARD_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictReason {
    Ok,
    BracketMismatch,
    Unbalanced,
    JaccardBelowThreshold,
    EmptyOutput,
}

/// Outcome of validating one substep output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationVerdict {
    pub accepted: bool,
    pub reason: VerdictReason,
    /// Present iff the Jaccard check was evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity: Option<f64>,
}

impl ValidationVerdict {
    fn ok() -> Self {
        ValidationVerdict {
            accepted: true,
            reason: VerdictReason::Ok,
            similarity: None,
        }
    }

    fn reject(reason: VerdictReason) -> Self {
        ValidationVerdict {
            accepted: false,
            reason,
            similarity: None,
        }
    }
}

/// Accepts a bracket-substep output iff its delimiters are balanced and
/// non-nested and removing them reproduces the input sentence exactly
/// (whitespace-normalized, original casing).
pub fn validate_bracketing(input: &Sentence, output: &str) -> ValidationVerdict {
    let (stripped, _spans) = match strip_brackets(output) {
        Ok(parts) => parts,
        Err(_) => return ValidationVerdict::reject(VerdictReason::Unbalanced),
    };
    if stripped.as_str() == input.normalized() {
        ValidationVerdict::ok()
    } else {
        ValidationVerdict::reject(VerdictReason::BracketMismatch)
    }
}

/// Jaccard similarity between the unigram sets of two texts. Delimiters never
/// tokenize, so bracketed and plain forms score identically. Both-empty is 1.
pub fn jaccard_unigrams(a: &str, b: &str) -> f64 {
    let sa = unigram_set(&tokenize(a));
    let sb = unigram_set(&tokenize(b));
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    let intersection = sa.intersection(&sb).count();
    intersection as f64 / union as f64
}

/// Accepts a replace-substep output iff it is non-empty and its unigrams
/// overlap the input's by at least `threshold` (delimiters excluded on both
/// sides). The verdict carries the computed similarity.
pub fn validate_replacement(
    input: &BracketedSentence,
    output: &str,
    threshold: f64,
) -> ValidationVerdict {
    if normalize_whitespace(&remove_delimiters(output)).is_empty() {
        return ValidationVerdict::reject(VerdictReason::EmptyOutput);
    }
    let similarity = jaccard_unigrams(input.as_str(), output);
    ValidationVerdict {
        accepted: similarity >= threshold,
        reason: if similarity >= threshold {
            VerdictReason::Ok
        } else {
            VerdictReason::JaccardBelowThreshold
        },
        similarity: Some(similarity),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(s: &str) -> Sentence {
        Sentence::new(s).unwrap()
    }

    fn bracketed(s: &str) -> BracketedSentence {
        BracketedSentence::new(s).unwrap()
    }

    #[test]
    fn bracketing_accepts_span_marking() {
        let input = sentence("I like the characters that he creates");
        let verdict = validate_bracketing(&input, "I like the characters that [he] creates");
        assert!(verdict.accepted);
        assert_eq!(verdict.reason, VerdictReason::Ok);
    }

    #[test]
    fn bracketing_accepts_zero_brackets() {
        // The prompt says "If there are none, give the original sentence".
        let input = sentence("a b c");
        assert!(validate_bracketing(&input, "a b c").accepted);
    }

    #[test]
    fn bracketing_rejects_text_changes() {
        let input = sentence("a b c");
        let verdict = validate_bracketing(&input, "a [x] c");
        assert!(!verdict.accepted);
        assert_eq!(verdict.reason, VerdictReason::BracketMismatch);
    }

    #[test]
    fn bracketing_rejects_unbalanced() {
        let input = sentence("a b c");
        let verdict = validate_bracketing(&input, "a [b c");
        assert_eq!(verdict.reason, VerdictReason::Unbalanced);
        let verdict = validate_bracketing(&input, "a [[b]] c");
        assert_eq!(verdict.reason, VerdictReason::Unbalanced);
    }

    #[test]
    fn bracketing_is_whitespace_insensitive_but_case_sensitive() {
        let input = sentence("a  b c");
        assert!(validate_bracketing(&input, "a [b] c").accepted);
        assert!(!validate_bracketing(&input, "A [b] c").accepted);
    }

    #[test]
    fn jaccard_identity_is_one() {
        assert_eq!(jaccard_unigrams("x y z", "x y z"), 1.0);
    }

    #[test]
    fn jaccard_half_overlap() {
        // {a,b,c} vs {b,c,d}: 2 shared of 4 total.
        assert_eq!(jaccard_unigrams("a b c", "b c d"), 0.5);
    }

    #[test]
    fn jaccard_both_empty_is_one() {
        assert_eq!(jaccard_unigrams("", ""), 1.0);
    }

    #[test]
    fn jaccard_symmetric() {
        let (a, b) = ("one two three", "two four");
        assert_eq!(jaccard_unigrams(a, b), jaccard_unigrams(b, a));
    }

    #[test]
    fn replacement_accepts_specific_expression() {
        let input = bracketed("I like the complex characters that [he] creates");
        let verdict = validate_replacement(
            &input,
            "I like the complex characters that George R. R. Martin creates",
            DEFAULT_JACCARD_THRESHOLD,
        );
        assert!(verdict.accepted, "similarity {:?}", verdict.similarity);
    }

    #[test]
    fn replacement_rejects_disjoint_rewrite() {
        let input = bracketed("a b c d e f g h");
        let verdict =
            validate_replacement(&input, "x y z w q r s t", DEFAULT_JACCARD_THRESHOLD);
        assert!(!verdict.accepted);
        assert_eq!(verdict.reason, VerdictReason::JaccardBelowThreshold);
        assert_eq!(verdict.similarity, Some(0.0));
    }

    #[test]
    fn replacement_rejects_empty_output() {
        let input = bracketed("a b c");
        let verdict = validate_replacement(&input, "", DEFAULT_JACCARD_THRESHOLD);
        assert_eq!(verdict.reason, VerdictReason::EmptyOutput);
        assert!(verdict.similarity.is_none());
        // Delimiter-only output is empty too.
        let verdict = validate_replacement(&input, " [] ", DEFAULT_JACCARD_THRESHOLD);
        assert_eq!(verdict.reason, VerdictReason::EmptyOutput);
    }
}
