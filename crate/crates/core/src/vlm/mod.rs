//! Vision-language model access: an OpenAI-compatible chat-completions
//! client, a scripted offline mock, and structured reply parsing.

mod client;
mod mock;
mod parse;
mod ratelimit;

use serde::{Deserialize, Serialize};

pub use client::{HttpVlm, RetryPolicy};
pub use mock::{MockScript, MockVlm, DEFAULT_TAG};
pub use parse::{extract_objects, parse_structured_label, ParseFailure, StructuredLabel};
pub use ratelimit::RateLimiter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Part {
    Text(String),
    /// PNG-encoded image.
    Image(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub role: Role,
    pub parts: Vec<Part>,
}

impl Message {
    pub fn system(text: impl Into<String>) -> Self {
        Message { role: Role::System, parts: vec![Part::Text(text.into())] }
    }

    pub fn user(text: impl Into<String>) -> Self {
        Message { role: Role::User, parts: vec![Part::Text(text.into())] }
    }

    pub fn with_images(mut self, images: impl IntoIterator<Item = Vec<u8>>) -> Self {
        self.parts.extend(images.into_iter().map(Part::Image));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub model_id: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    pub fn new(model_id: impl Into<String>, messages: Vec<Message>) -> Self {
        ChatRequest { model_id: model_id.into(), messages, temperature: 0.0, max_tokens: 1024 }
    }

    pub fn validate(&self) -> Result<(), VlmError> {
        if self.messages.is_empty() {
            return Err(VlmError::InvalidRequest("request has no messages".into()));
        }
        let misplaced = self
            .messages
            .iter()
            .any(|m| m.role != Role::User && m.parts.iter().any(|p| matches!(p, Part::Image(_))));
        if misplaced {
            return Err(VlmError::InvalidRequest("images are only allowed in user messages".into()));
        }
        Ok(())
    }

    /// All text parts joined with newlines.
    pub fn text(&self) -> String {
        self.messages
            .iter()
            .flat_map(|m| &m.parts)
            .filter_map(|p| match p {
                Part::Text(t) => Some(t.as_str()),
                Part::Image(_) => None,
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn image_count(&self) -> usize {
        self.messages.iter().flat_map(|m| &m.parts).filter(|p| matches!(p, Part::Image(_))).count()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub usage: Usage,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VlmError {
    #[error("provider unreachable after {attempts} attempts: {message}")]
    Network { attempts: u32, message: String },
    #[error("provider unavailable: HTTP {status} after {attempts} attempts")]
    Unavailable { status: u16, attempts: u32 },
    #[error("provider rejected request: HTTP {status}: {body}")]
    Rejected { status: u16, body: String },
    #[error("malformed provider payload: {0}")]
    Malformed(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("missing credentials: environment variable {0} is not set")]
    MissingCredentials(String),
    #[error("mock script: {0}")]
    Script(String),
    #[error("scripted provider error: {0}")]
    Scripted(String),
}

/// Anything that can answer a chat request.
pub trait VisionLanguageModel: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, VlmError>;
}

impl<T: VisionLanguageModel + ?Sized> VisionLanguageModel for &T {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, VlmError> {
        (**self).complete(req)
    }
}

impl<T: VisionLanguageModel + ?Sized> VisionLanguageModel for Box<T> {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, VlmError> {
        (**self).complete(req)
    }
}

/// Fixture marker embedded in every prompt so the mock can route replies.
pub fn fixture_tag(key: &str) -> String {
    format!("[FIXTURE:{key}]")
}

/// Sends `req`, re-prompting once with a format reminder if the reply has no
/// parsable label. `label` is `None` when both replies were unparsable.
///
/// On the re-prompt the fixture tag `key` is rewritten to `key/retry`, so
/// scripted providers can answer the second attempt differently.
pub fn complete_structured(
    vlm: &dyn VisionLanguageModel,
    req: &ChatRequest,
    tag_key: Option<&str>,
) -> Result<LabelExchange, VlmError> {
    let first = vlm.complete(req)?;
    let mut exchange = LabelExchange { replies: vec![first.text.clone()], label: None };
    if let Ok(label) = parse_structured_label(&first.text) {
        exchange.label = Some(label);
        return Ok(exchange);
    }
    let mut retry = req.clone();
    if let Some(key) = tag_key {
        let (from, to) = (fixture_tag(key), fixture_tag(&format!("{key}/retry")));
        for part in retry.messages.iter_mut().flat_map(|m| m.parts.iter_mut()) {
            if let Part::Text(t) = part {
                *t = t.replace(&from, &to);
            }
        }
    }
    retry.messages.push(Message { role: Role::Assistant, parts: vec![Part::Text(first.text)] });
    retry.messages.push(Message::user(
        "Your previous reply could not be parsed. Reply with only one JSON object with the keys \
         \"scenes\", \"actions\", \"confidences\" and \"evidence\".",
    ));
    let second = vlm.complete(&retry)?;
    exchange.replies.push(second.text.clone());
    exchange.label = parse_structured_label(&second.text).ok();
    Ok(exchange)
}

/// Raw replies and the parsed label of a structured request.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelExchange {
    pub replies: Vec<String>,
    pub label: Option<StructuredLabel>,
}
