//! Backend abstraction over a chat-completion service.
//!
//! A [`Gateway`] renders a [`PromptSpec`] into messages and dispatches it to
//! one of three backends: a live wire client, a persistent-cache wrapper
//! around the live client, or a deterministic scripted mock. Rendering is a
//! pure function of the spec; cache keys and mock digests depend on the
//! rendered bytes.

mod cache;
mod live;
mod mock;

pub use cache::{CacheRecord, ResponseCache};
pub use live::{HttpTransport, LiveClient, Transport, TransportFailure};
pub use mock::{MockMatcher, MockRecord, MockScript};

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Sampling and transport parameters for one completion call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub temperature: f64,
    pub top_p: f64,
    pub frequency_penalty: f64,
    pub presence_penalty: f64,
    pub max_retries_transport: u32,
    pub model_name: String,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            temperature: 1.0,
            top_p: 1.0,
            frequency_penalty: 0.0,
            presence_penalty: 0.0,
            max_retries_transport: 3,
            model_name: "gpt-3.5-turbo".to_string(),
        }
    }
}

/// Structured identity of a prompt: which node and substep produced it, and
/// for which sentence. Mock scripts match on these fields.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptLabel {
    pub node: String,
    pub substep: String,
    pub sentence: String,
}

impl PromptLabel {
    pub fn new(
        node: impl Into<String>,
        substep: impl Into<String>,
        sentence: impl Into<String>,
    ) -> Self {
        PromptLabel {
            node: node.into(),
            substep: substep.into(),
            sentence: sentence.into(),
        }
    }
}

/// A fully assembled prompt: instruction, in-context examples, final input.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptSpec {
    pub system_instruction: String,
    /// `(input_rendering, output_rendering)` pairs, in prompt order.
    pub examples: Vec<(String, String)>,
    pub final_input: String,
    pub label: PromptLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

impl Message {
    fn new(role: &str, content: impl Into<String>) -> Self {
        Message {
            role: role.to_string(),
            content: content.into(),
        }
    }
}

/// The message list sent over the wire. Produced only by [`render_prompt`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderedPrompt {
    pub messages: Vec<Message>,
}

/// Deterministic rendering: one system message, examples as alternating
/// user/assistant messages, then the final input as a user message.
pub fn render_prompt(spec: &PromptSpec) -> RenderedPrompt {
    let mut messages = Vec::with_capacity(2 + 2 * spec.examples.len());
    messages.push(Message::new("system", &spec.system_instruction));
    for (input, output) in &spec.examples {
        messages.push(Message::new("user", input));
        messages.push(Message::new("assistant", output));
    }
    messages.push(Message::new("user", &spec.final_input));
    RenderedPrompt { messages }
}

/// `Context:`/`Sentence:` block used for inputs that carry context. Prompts
/// without context render the sentence alone.
pub fn render_context_block(context: &crate::text::Context, sentence: &str) -> String {
    if context.is_empty() {
        format!("Sentence: {sentence}")
    } else {
        format!("Context: {}\nSentence: {sentence}", context.render())
    }
}

/// SHA-256 over model name, sampling parameters, and rendered messages.
/// This is the persistent-cache key and the mock digest.
pub fn prompt_digest(cfg: &GenerationConfig, rendered: &RenderedPrompt) -> String {
    #[derive(Serialize)]
    struct KeyMaterial<'a> {
        model: &'a str,
        temperature: f64,
        top_p: f64,
        frequency_penalty: f64,
        presence_penalty: f64,
        messages: &'a [Message],
    }
    let material = KeyMaterial {
        model: &cfg.model_name,
        temperature: cfg.temperature,
        top_p: cfg.top_p,
        frequency_penalty: cfg.frequency_penalty,
        presence_penalty: cfg.presence_penalty,
        messages: &rendered.messages,
    };
    let bytes = serde_json::to_vec(&material).expect("key material serializes");
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("transport failed after {attempts} attempts: {message}")]
    Transport { message: String, attempts: u32 },
    #[error("authentication rejected: {0}")]
    Auth(String),
    #[error("mock script has no response for node={node:?} substep={substep:?} sentence={sentence:?}")]
    MockMiss {
        node: String,
        substep: String,
        sentence: String,
    },
    #[error("response cache at {path}: {message}")]
    Cache { path: String, message: String },
    #[error("backend configuration: {0}")]
    Config(String),
}

impl GatewayError {
    /// Errors that abort a run rather than a single item retry.
    pub fn is_fatal(&self) -> bool {
        matches!(
            self,
            GatewayError::Auth(_) | GatewayError::MockMiss { .. } | GatewayError::Config(_)
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("response does not begin with true/false: {0:?}")]
pub struct UnparseableBoolean(pub String);

/// Reads the first alphabetic token, case-insensitively, as true/false.
pub fn parse_boolean(response: &str) -> Result<bool, UnparseableBoolean> {
    let first: String = response
        .chars()
        .skip_while(|c| !c.is_alphabetic())
        .take_while(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    match first.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(UnparseableBoolean(response.to_string())),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("response carries no integer rating in [1,5]: {0:?}")]
pub struct UnparseableRating(pub String);

/// Extracts the first integer in the response; values outside `[1,5]` are
/// errors, never clamped.
pub fn parse_rating(response: &str) -> Result<u8, UnparseableRating> {
    let digits: String = response
        .chars()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect();
    let value: u64 = digits
        .parse()
        .map_err(|_| UnparseableRating(response.to_string()))?;
    if (1..=5).contains(&value) {
        Ok(value as u8)
    } else {
        Err(UnparseableRating(response.to_string()))
    }
}

/// What a configured backend does with one rendered prompt.
pub trait CompletionBackend: Send + Sync {
    fn complete(
        &self,
        rendered: &RenderedPrompt,
        cfg: &GenerationConfig,
        label: &PromptLabel,
    ) -> Result<String, GatewayError>;

    fn cache_hits(&self) -> u64 {
        0
    }

    fn network_calls(&self) -> u64 {
        0
    }
}

/// A backend driven by a plain function. Used by tests to script behaviors
/// (echo, always-reject, counting) without a mock file.
pub struct FnBackend<F>(pub F);

impl<F> CompletionBackend for FnBackend<F>
where
    F: Fn(&RenderedPrompt, &GenerationConfig, &PromptLabel) -> Result<String, GatewayError>
        + Send
        + Sync,
{
    fn complete(
        &self,
        rendered: &RenderedPrompt,
        cfg: &GenerationConfig,
        label: &PromptLabel,
    ) -> Result<String, GatewayError> {
        (self.0)(rendered, cfg, label)
    }
}

/// Cache wrapper: consult the persistent cache, fall through to live.
pub struct CachedBackend {
    live: LiveClient,
    cache: ResponseCache,
    hits: AtomicU64,
}

impl CachedBackend {
    pub fn new(live: LiveClient, cache: ResponseCache) -> Self {
        CachedBackend {
            live,
            cache,
            hits: AtomicU64::new(0),
        }
    }
}

impl CompletionBackend for CachedBackend {
    fn complete(
        &self,
        rendered: &RenderedPrompt,
        cfg: &GenerationConfig,
        label: &PromptLabel,
    ) -> Result<String, GatewayError> {
        let key = prompt_digest(cfg, rendered);
        if let Some(response) = self.cache.get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(response);
        }
        let response = self.live.complete(rendered, cfg, label)?;
        self.cache.put(&key, &cfg.model_name, &response)?;
        Ok(response)
    }

    fn cache_hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    fn network_calls(&self) -> u64 {
        self.live.network_calls()
    }
}

/// Call counters surfaced in run manifests.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct GatewayCounters {
    pub calls: u64,
    pub cache_hits: u64,
    pub network_calls: u64,
}

/// Entry point every module uses to talk to the model.
pub struct Gateway {
    backend: Box<dyn CompletionBackend>,
    calls: AtomicU64,
}

impl Gateway {
    pub fn new(backend: Box<dyn CompletionBackend>) -> Self {
        Gateway {
            backend,
            calls: AtomicU64::new(0),
        }
    }

    pub fn mock(script: MockScript) -> Self {
        Gateway::new(Box::new(script))
    }

    pub fn live(client: LiveClient) -> Self {
        Gateway::new(Box::new(client))
    }

    pub fn cached(client: LiveClient, cache: ResponseCache) -> Self {
        Gateway::new(Box::new(CachedBackend::new(client, cache)))
    }

    /// Renders the prompt and returns the backend's text.
    pub fn complete(
        &self,
        spec: &PromptSpec,
        cfg: &GenerationConfig,
    ) -> Result<String, GatewayError> {
        let rendered = render_prompt(spec);
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.backend.complete(&rendered, cfg, &spec.label)
    }

    pub fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn counters(&self) -> GatewayCounters {
        GatewayCounters {
            calls: self.call_count(),
            cache_hits: self.backend.cache_hits(),
            network_calls: self.backend.network_calls(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::Context;

    fn spec_with(examples: usize, context: bool) -> PromptSpec {
        let ctx = if context {
            Context::new(vec!["some context".into()])
        } else {
            Context::empty()
        };
        PromptSpec {
            system_instruction: crate::prompts::CUTOFF_CHECK.to_string(),
            examples: (0..examples)
                .map(|i| (format!("in {i}"), format!("out {i}")))
                .collect(),
            final_input: render_context_block(&ctx, "target"),
            label: PromptLabel::new("DEL", "check", "target"),
        }
    }

    #[test]
    fn render_counts_messages() {
        let rendered = render_prompt(&spec_with(2, true));
        assert_eq!(rendered.messages.len(), 6); // system + 4 example + final
        assert_eq!(rendered.messages[0].role, "system");
        assert_eq!(rendered.messages[1].role, "user");
        assert_eq!(rendered.messages[2].role, "assistant");
        assert_eq!(rendered.messages[5].role, "user");
    }

    #[test]
    fn render_zero_examples() {
        let rendered = render_prompt(&spec_with(0, false));
        assert_eq!(rendered.messages.len(), 2);
        assert_eq!(rendered.messages[1].content, "Sentence: target");
    }

    #[test]
    fn render_is_deterministic() {
        let spec = spec_with(3, true);
        assert_eq!(render_prompt(&spec), render_prompt(&spec));
        let cfg = GenerationConfig::default();
        assert_eq!(
            prompt_digest(&cfg, &render_prompt(&spec)),
            prompt_digest(&cfg, &render_prompt(&spec))
        );
    }

    #[test]
    fn context_block_includes_context() {
        let ctx = Context::new(vec!["c1".into(), "c2".into()]);
        assert_eq!(
            render_context_block(&ctx, "s"),
            "Context: c1\nc2\nSentence: s"
        );
        assert_eq!(render_context_block(&Context::empty(), "s"), "Sentence: s");
    }

    #[test]
    fn parse_boolean_cases() {
        assert_eq!(parse_boolean("True"), Ok(true));
        assert_eq!(parse_boolean("false."), Ok(false));
        assert_eq!(parse_boolean("  FALSE, clearly"), Ok(false));
        assert!(parse_boolean("It depends").is_err());
        assert!(parse_boolean("").is_err());
    }

    #[test]
    fn parse_rating_cases() {
        assert_eq!(parse_rating("4"), Ok(4));
        assert_eq!(parse_rating("Rating: 3"), Ok(3));
        assert!(parse_rating("ten").is_err());
        assert!(parse_rating("0").is_err());
        assert!(parse_rating("6 stars").is_err());
    }

    #[test]
    fn gateway_counts_calls() {
        let gateway = Gateway::new(Box::new(FnBackend(|_: &RenderedPrompt, _: &GenerationConfig, _: &PromptLabel| {
            Ok("ok".to_string())
        })));
        let cfg = GenerationConfig::default();
        let spec = spec_with(0, false);
        gateway.complete(&spec, &cfg).unwrap();
        gateway.complete(&spec, &cfg).unwrap();
        assert_eq!(gateway.call_count(), 2);
    }
}
