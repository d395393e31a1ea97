//! Deterministic scripted backend. Holds no transport, so it cannot perform
//! network activity by construction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    prompt_digest, CompletionBackend, GatewayError, GenerationConfig, PromptLabel, RenderedPrompt,
};

/// Match criteria for one scripted response. Every present field must match;
/// an empty matcher matches every prompt. Structured fields are preferred
/// over digests for script readability.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockMatcher {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substep: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_hex: Option<String>,
}

impl MockMatcher {
    fn matches(&self, label: &PromptLabel, digest: &dyn Fn() -> String) -> bool {
        if let Some(node) = &self.node {
            if node != &label.node {
                return false;
            }
        }
        if let Some(substep) = &self.substep {
            if substep != &label.substep {
                return false;
            }
        }
        if let Some(sentence) = &self.sentence {
            if sentence != &label.sentence {
                return false;
            }
        }
        if let Some(key_hex) = &self.key_hex {
            if key_hex != &digest() {
                return false;
            }
        }
        true
    }
}

/// One JSON-lines script record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MockRecord {
    #[serde(rename = "match")]
    pub matcher: MockMatcher,
    pub response: String,
}

/// An ordered response script; the first matching record wins. Immutable
/// after load.
#[derive(Debug, Clone, Default)]
pub struct MockScript {
    records: Vec<MockRecord>,
}

impl MockScript {
    pub fn new(records: Vec<MockRecord>) -> Self {
        MockScript { records }
    }

    pub fn from_jsonl(data: &str) -> Result<Self, GatewayError> {
        let mut records = Vec::new();
        for (lineno, line) in data.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: MockRecord =
                serde_json::from_str(line).map_err(|e| GatewayError::Config(format!(
                    "mock script line {}: {e}",
                    lineno + 1
                )))?;
            records.push(record);
        }
        Ok(MockScript { records })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        let data = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            GatewayError::Config(format!(
                "mock script {}: {e}",
                path.as_ref().display()
            ))
        })?;
        Self::from_jsonl(&data)
    }

    /// Convenience for tests: respond to a (node, substep, sentence) triple.
    pub fn respond(
        mut self,
        node: &str,
        substep: &str,
        sentence: &str,
        response: &str,
    ) -> Self {
        self.records.push(MockRecord {
            matcher: MockMatcher {
                node: Some(node.to_string()),
                substep: Some(substep.to_string()),
                sentence: Some(sentence.to_string()),
                key_hex: None,
            },
            response: response.to_string(),
        });
        self
    }

    /// Convenience for tests: respond to every prompt not matched earlier.
    pub fn respond_always(mut self, response: &str) -> Self {
        self.records.push(MockRecord {
            matcher: MockMatcher::default(),
            response: response.to_string(),
        });
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl CompletionBackend for MockScript {
    fn complete(
        &self,
        rendered: &RenderedPrompt,
        cfg: &GenerationConfig,
        label: &PromptLabel,
    ) -> Result<String, GatewayError> {
        let digest = || prompt_digest(cfg, rendered);
        for record in &self.records {
            if record.matcher.matches(label, &digest) {
                return Ok(record.response.clone());
            }
        }
        Err(GatewayError::MockMiss {
            node: label.node.clone(),
            substep: label.substep.clone(),
            sentence: label.sentence.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{render_prompt, PromptSpec};

    fn spec(node: &str, substep: &str, sentence: &str) -> PromptSpec {
        PromptSpec {
            system_instruction: "sys".into(),
            examples: vec![],
            final_input: sentence.to_string(),
            label: PromptLabel::new(node, substep, sentence),
        }
    }

    #[test]
    fn structured_match_wins_in_order() {
        let script = MockScript::default()
            .respond("NP", "bracket", "a b c", "a [b] c")
            .respond_always("fallback");
        let cfg = GenerationConfig::default();
        let s = spec("NP", "bracket", "a b c");
        let out = script
            .complete(&render_prompt(&s), &cfg, &s.label)
            .unwrap();
        assert_eq!(out, "a [b] c");
        let s2 = spec("DEL", "bracket", "a b c");
        let out2 = script
            .complete(&render_prompt(&s2), &cfg, &s2.label)
            .unwrap();
        assert_eq!(out2, "fallback");
    }

    #[test]
    fn miss_is_an_error() {
        let script = MockScript::default().respond("NP", "bracket", "x", "y");
        let cfg = GenerationConfig::default();
        let s = spec("NP", "replace", "x");
        let err = script
            .complete(&render_prompt(&s), &cfg, &s.label)
            .unwrap_err();
        assert!(err.is_fatal());
        assert!(matches!(err, GatewayError::MockMiss { .. }));
    }

    #[test]
    fn digest_match_works() {
        let cfg = GenerationConfig::default();
        let s = spec("NP", "bracket", "a");
        let digest = prompt_digest(&cfg, &render_prompt(&s));
        let script = MockScript::new(vec![MockRecord {
            matcher: MockMatcher {
                key_hex: Some(digest),
                ..MockMatcher::default()
            },
            response: "via digest".to_string(),
        }]);
        let out = script
            .complete(&render_prompt(&s), &cfg, &s.label)
            .unwrap();
        assert_eq!(out, "via digest");
    }

    #[test]
    fn jsonl_parsing() {
        let data = concat!(
            r#"{"match": {"node": "NP", "substep": "bracket", "sentence": "s"}, "response": "r1"}"#,
            "\n\n",
            r#"{"match": {}, "response": "r2"}"#,
            "\n"
        );
        let script = MockScript::from_jsonl(data).unwrap();
        assert_eq!(script.len(), 2);
        assert!(MockScript::from_jsonl("{bad").is_err());
    }
}
