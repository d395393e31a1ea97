//! Live wire client for an HTTPS chat-completion endpoint.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde_json::json;

use super::{CompletionBackend, GatewayError, GenerationConfig, PromptLabel, RenderedPrompt};

/// Environment variable naming the chat-completion endpoint URL.
pub const ENV_API_URL: &str = "DECONTEXT_API_URL";
/// Environment variable holding the bearer credential.
pub const ENV_API_KEY: &str = "DECONTEXT_API_KEY";

/// Outcome of one wire attempt.
#[derive(Debug)]
pub enum TransportFailure {
    /// Worth retrying: timeouts, 5xx, rate limits, connection resets.
    Retryable(String),
    /// Credential rejected; retrying cannot help.
    Auth(String),
}

/// One HTTP POST of a chat-completion request body, returning the raw
/// response body. Injected so tests can count, fail, or forbid network use.
pub trait Transport: Send + Sync {
    fn post_chat(&self, body: &serde_json::Value) -> Result<String, TransportFailure>;
}

/// Production transport over `ureq`.
pub struct HttpTransport {
    url: String,
    api_key: String,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(url: impl Into<String>, api_key: impl Into<String>) -> Self {
        HttpTransport {
            url: url.into(),
            api_key: api_key.into(),
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(120))
                .build(),
        }
    }
}

impl Transport for HttpTransport {
    fn post_chat(&self, body: &serde_json::Value) -> Result<String, TransportFailure> {
        let response = self
            .agent
            .post(&self.url)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .set("Content-Type", "application/json")
            .send_string(&body.to_string());
        match response {
            Ok(resp) => resp
                .into_string()
                .map_err(|e| TransportFailure::Retryable(e.to_string())),
            Err(ureq::Error::Status(code, resp)) => {
                let text = resp.into_string().unwrap_or_default();
                if code == 401 || code == 403 {
                    Err(TransportFailure::Auth(format!("HTTP {code}: {text}")))
                } else {
                    Err(TransportFailure::Retryable(format!("HTTP {code}: {text}")))
                }
            }
            Err(e) => Err(TransportFailure::Retryable(e.to_string())),
        }
    }
}

/// Chat-completion client with bounded exponential backoff on retryable
/// transport failures.
pub struct LiveClient {
    transport: Box<dyn Transport>,
    network_calls: AtomicU64,
    backoff_base: Duration,
}

impl LiveClient {
    /// Builds the client from `DECONTEXT_API_URL` / `DECONTEXT_API_KEY`.
    pub fn from_env() -> Result<Self, GatewayError> {
        let url = std::env::var(ENV_API_URL)
            .map_err(|_| GatewayError::Config(format!("{ENV_API_URL} is not set")))?;
        let key = std::env::var(ENV_API_KEY)
            .map_err(|_| GatewayError::Config(format!("{ENV_API_KEY} is not set")))?;
        Ok(LiveClient::with_transport(Box::new(HttpTransport::new(url, key))))
    }

    pub fn with_transport(transport: Box<dyn Transport>) -> Self {
        LiveClient {
            transport,
            network_calls: AtomicU64::new(0),
            backoff_base: Duration::from_millis(250),
        }
    }

    /// Overrides the first backoff interval (tests set this to zero).
    pub fn with_backoff_base(mut self, base: Duration) -> Self {
        self.backoff_base = base;
        self
    }

    pub fn network_calls(&self) -> u64 {
        self.network_calls.load(Ordering::Relaxed)
    }

    fn request_body(rendered: &RenderedPrompt, cfg: &GenerationConfig) -> serde_json::Value {
        json!({
            "model": cfg.model_name,
            "messages": rendered.messages,
            "temperature": cfg.temperature,
            "top_p": cfg.top_p,
            "frequency_penalty": cfg.frequency_penalty,
            "presence_penalty": cfg.presence_penalty,
        })
    }

    fn extract_content(body: &str) -> Result<String, String> {
        let value: serde_json::Value =
            serde_json::from_str(body).map_err(|e| format!("malformed response JSON: {e}"))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| "response carries no choices[0].message.content".to_string())
    }
}

impl CompletionBackend for LiveClient {
    fn complete(
        &self,
        rendered: &RenderedPrompt,
        cfg: &GenerationConfig,
        _label: &PromptLabel,
    ) -> Result<String, GatewayError> {
        let body = Self::request_body(rendered, cfg);
        let attempts_allowed = 1 + cfg.max_retries_transport;
        let mut last_error = String::new();
        for attempt in 0..attempts_allowed {
            if attempt > 0 && !self.backoff_base.is_zero() {
                std::thread::sleep(self.backoff_base * 2u32.pow(attempt - 1));
            }
            self.network_calls.fetch_add(1, Ordering::Relaxed);
            match self.transport.post_chat(&body) {
                Ok(raw) => match Self::extract_content(&raw) {
                    Ok(content) => return Ok(content),
                    Err(message) => last_error = message,
                },
                Err(TransportFailure::Auth(message)) => return Err(GatewayError::Auth(message)),
                Err(TransportFailure::Retryable(message)) => last_error = message,
            }
        }
        Err(GatewayError::Transport {
            message: last_error,
            attempts: attempts_allowed,
        })
    }

    fn network_calls(&self) -> u64 {
        self.network_calls()
    }
}
