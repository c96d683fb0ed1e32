use std::sync::Arc;
use std::time::{Duration, Instant};

use base64::Engine;
use serde_json::{json, Value};

use super::{ChatRequest, ChatResponse, Part, RateLimiter, Role, Usage, VisionLanguageModel, VlmError};

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: u32,
    /// Delay before the first retry; doubles on each further retry.
    pub base_delay: Duration,
    pub timeout: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 3, base_delay: Duration::from_secs(1), timeout: Duration::from_secs(120) }
    }
}

impl RetryPolicy {
    pub fn delay(&self, retry: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(retry)
    }
}

/// Client for `POST <endpoint>/chat/completions` on OpenAI-compatible servers.
pub struct HttpVlm {
    endpoint: String,
    api_key: Option<String>,
    retry: RetryPolicy,
    limiter: Arc<RateLimiter>,
    agent: ureq::Agent,
}

impl std::fmt::Debug for HttpVlm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpVlm").field("endpoint", &self.endpoint).field("retry", &self.retry).finish()
    }
}

enum Attempt {
    Done(ChatResponse),
    Retryable(VlmError),
    Fatal(VlmError),
}

impl HttpVlm {
    pub fn new(endpoint: &str, api_key: Option<String>, retry: RetryPolicy, limiter: Arc<RateLimiter>) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(retry.timeout))
            .build();
        HttpVlm {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            api_key,
            retry,
            limiter,
            agent: config.into(),
        }
    }

    /// Reads the API key from `env_var`.
    pub fn from_env(endpoint: &str, env_var: &str, retry: RetryPolicy, limiter: Arc<RateLimiter>) -> Result<Self, VlmError> {
        let key = std::env::var(env_var).map_err(|_| VlmError::MissingCredentials(env_var.to_string()))?;
        Ok(Self::new(endpoint, Some(key), retry, limiter))
    }

    pub fn url(&self) -> String {
        format!("{}/chat/completions", self.endpoint)
    }

    fn attempt(&self, body: &str) -> Attempt {
        let mut request = self.agent.post(&self.url()).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = match request.send(body) {
            Ok(r) => r,
            Err(e) => return Attempt::Retryable(VlmError::Network { attempts: 0, message: e.to_string() }),
        };
        let status = response.status().as_u16();
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => return Attempt::Retryable(VlmError::Network { attempts: 0, message: e.to_string() }),
        };
        match status {
            200..=299 => match parse_completion(&text) {
                Ok(r) => Attempt::Done(r),
                Err(e) => Attempt::Fatal(e),
            },
            429 | 500..=599 => Attempt::Retryable(VlmError::Unavailable { status, attempts: 0 }),
            _ => Attempt::Fatal(VlmError::Rejected { status, body: text.chars().take(500).collect() }),
        }
    }
}

/// Request body in the OpenAI chat-completions schema; images become base64 data URLs.
pub fn request_body(req: &ChatRequest) -> Value {
    let engine = base64::engine::general_purpose::STANDARD;
    let messages: Vec<Value> = req
        .messages
        .iter()
        .map(|m| {
            let role = match m.role {
                Role::System => "system",
                Role::User => "user",
                Role::Assistant => "assistant",
            };
            let text_only = m.parts.iter().all(|p| matches!(p, Part::Text(_)));
            let content = if text_only {
                Value::from(
                    m.parts
                        .iter()
                        .filter_map(|p| if let Part::Text(t) = p { Some(t.as_str()) } else { None })
                        .collect::<Vec<_>>()
                        .join("\n"),
                )
            } else {
                Value::from(
                    m.parts
                        .iter()
                        .map(|p| match p {
                            Part::Text(t) => json!({"type": "text", "text": t}),
                            Part::Image(png) => json!({
                                "type": "image_url",
                                "image_url": {"url": format!("data:image/png;base64,{}", engine.encode(png))}
                            }),
                        })
                        .collect::<Vec<_>>(),
                )
            };
            json!({"role": role, "content": content})
        })
        .collect();
    json!({
        "model": req.model_id,
        "messages": messages,
        "temperature": req.temperature,
        "max_tokens": req.max_tokens,
    })
}

fn parse_completion(body: &str) -> Result<ChatResponse, VlmError> {
    let v: Value = serde_json::from_str(body).map_err(|e| VlmError::Malformed(e.to_string()))?;
    let content = v
        .pointer("/choices/0/message/content")
        .ok_or_else(|| VlmError::Malformed("missing choices[0].message.content".into()))?;
    let text = match content {
        Value::String(s) => s.clone(),
        Value::Array(parts) => parts
            .iter()
            .filter_map(|p| p.get("text").and_then(Value::as_str))
            .collect::<Vec<_>>()
            .join(""),
        Value::Null => String::new(),
        other => return Err(VlmError::Malformed(format!("unexpected content {other}"))),
    };
    let usage = Usage {
        prompt_tokens: v.pointer("/usage/prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
        completion_tokens: v.pointer("/usage/completion_tokens").and_then(Value::as_u64).unwrap_or(0),
    };
    Ok(ChatResponse { text, usage, latency_ms: 0 })
}

impl VisionLanguageModel for HttpVlm {
    /// Sends the request, retrying timeouts, 429 and 5xx with exponential backoff.
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, VlmError> {
        req.validate()?;
        let body = request_body(req).to_string();
        let started = Instant::now();
        let attempts = self.retry.max_retries + 1;
        let mut last = None;
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.retry.delay(attempt - 1));
            }
            self.limiter.acquire();
            match self.attempt(&body) {
                Attempt::Done(mut r) => {
                    r.latency_ms = started.elapsed().as_millis() as u64;
                    return Ok(r);
                }
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retryable(e) => last = Some(e),
            }
        }
        Err(match last.expect("at least one attempt") {
            VlmError::Unavailable { status, .. } => VlmError::Unavailable { status, attempts },
            VlmError::Network { message, .. } => VlmError::Network { attempts, message },
            other => other,
        })
    }
}
