use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::{fixture_tag, ChatRequest, ChatResponse, Usage, VisionLanguageModel, VlmError};

/// Key of the fallback rule in script files.
pub const DEFAULT_TAG: &str = "*";

/// Prefix marking a scripted provider failure instead of a reply.
const ERROR_PREFIX: &str = "!error";

/// Canned replies keyed by fixture tag.
///
/// File format: one rule per line, `tag<TAB>response`. Tags may be written
/// bare (`v000/u00`) or in full (`[FIXTURE:v000/u00]`); `*` is the default
/// rule. Responses use `\n`, `\t` and `\\` escapes. A response starting with
/// `!error` makes the mock fail the call. `#` starts a comment line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MockScript {
    rules: Vec<(String, String)>,
    default: String,
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\n', "\\n").replace('\t', "\\t").replace('\r', "\\r")
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some(o) => out.push(o),
            None => out.push('\\'),
        }
    }
    out
}

fn full_tag(tag: &str) -> String {
    if tag.starts_with("[FIXTURE:") {
        tag.to_string()
    } else {
        fixture_tag(tag)
    }
}

impl MockScript {
    pub fn new(default: impl Into<String>) -> Self {
        MockScript { rules: Vec::new(), default: default.into() }
    }

    /// Appends a rule; earlier rules win when several tags appear in one request.
    pub fn rule(mut self, tag: &str, response: impl Into<String>) -> Self {
        self.push(tag, response);
        self
    }

    pub fn push(&mut self, tag: &str, response: impl Into<String>) {
        self.rules.push((full_tag(tag), response.into()));
    }

    pub fn set_default(&mut self, response: impl Into<String>) {
        self.default = response.into();
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self, VlmError> {
        let mut script = MockScript::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (tag, response) = line
                .split_once('\t')
                .ok_or_else(|| VlmError::Script(format!("line {}: expected tag<TAB>response", i + 1)))?;
            let response = unescape(response);
            if tag.trim() == DEFAULT_TAG {
                script.default = response;
            } else {
                script.push(tag.trim(), response);
            }
        }
        Ok(script)
    }

    pub fn load(path: &Path) -> Result<Self, VlmError> {
        let text = fs::read_to_string(path).map_err(|e| VlmError::Script(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# fixture tag\tcanned response\n");
        out.push_str(&format!("{DEFAULT_TAG}\t{}\n", escape(&self.default)));
        for (tag, response) in &self.rules {
            out.push_str(&format!("{tag}\t{}\n", escape(response)));
        }
        out
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.render())
    }
}

fn tags_in(text: &str) -> impl Iterator<Item = &str> {
    text.match_indices("[FIXTURE:").filter_map(move |(i, _)| text[i..].find(']').map(|end| &text[i..i + end + 1]))
}

/// Deterministic scripted provider for offline runs and tests.
#[derive(Debug)]
pub struct MockVlm {
    script: MockScript,
    index: HashMap<String, usize>,
    calls: AtomicUsize,
}

impl MockVlm {
    pub fn new(script: MockScript) -> Self {
        let mut index = HashMap::new();
        for (i, (tag, _)) in script.rules.iter().enumerate() {
            index.entry(tag.clone()).or_insert(i);
        }
        MockVlm { script, index, calls: AtomicUsize::new(0) }
    }

    pub fn load(path: &Path) -> Result<Self, VlmError> {
        Ok(Self::new(MockScript::load(path)?))
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// The canned text for `req`: the earliest rule whose tag appears in the prompt, else the default.
    pub fn resolve(&self, req: &ChatRequest) -> &str {
        let text = req.text();
        tags_in(&text)
            .filter_map(|t| self.index.get(t).copied())
            .min()
            .map(|i| self.script.rules[i].1.as_str())
            .unwrap_or(&self.script.default)
    }
}

impl VisionLanguageModel for MockVlm {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, VlmError> {
        req.validate()?;
        self.calls.fetch_add(1, Ordering::SeqCst);
        let text = self.resolve(req);
        if let Some(msg) = text.strip_prefix(ERROR_PREFIX) {
            return Err(VlmError::Scripted(msg.trim().to_string()));
        }
        Ok(ChatResponse {
            text: text.to_string(),
            usage: Usage {
                prompt_tokens: req.text().split_whitespace().count() as u64,
                completion_tokens: text.split_whitespace().count() as u64,
            },
            latency_ms: 0,
        })
    }
}
