use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::taxonomy::{Action, Scene};

pub const DEFAULT_CONFIDENCE: f64 = 0.5;

/// Labels read out of a model reply.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StructuredLabel {
    pub scenes: BTreeSet<Scene>,
    pub actions: BTreeSet<Action>,
    pub confidences: BTreeMap<Action, f64>,
    pub evidence: BTreeMap<Action, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl StructuredLabel {
    pub fn confidence(&self, action: Action) -> f64 {
        self.confidences.get(&action).copied().unwrap_or(DEFAULT_CONFIDENCE)
    }

    /// JSON object in the reply format the prompts ask for.
    pub fn to_reply_json(&self) -> Value {
        serde_json::json!({
            "scenes": self.scenes.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            "actions": self.actions.iter().map(|a| a.as_str()).collect::<Vec<_>>(),
            "confidences": self.confidences.iter().map(|(a, c)| (a.as_str().to_string(), Value::from(*c))).collect::<Map<_, _>>(),
            "evidence": self.evidence.iter().map(|(a, e)| (a.as_str().to_string(), Value::from(e.clone()))).collect::<Map<_, _>>(),
        })
    }
}

/// The reply contained no object that could be read as a label.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no parsable label object in reply ({reason})")]
pub struct ParseFailure {
    pub raw: String,
    pub reason: String,
}

fn strip_noise(text: &str) -> String {
    let mut s = text.to_string();
    // reasoning blocks may contain stray braces
    while let (Some(a), Some(b)) = (s.find("<think>"), s.find("</think>")) {
        if b < a {
            break;
        }
        s.replace_range(a..b + "</think>".len(), "");
    }
    s.replace("```json", "")
        .replace("```", "")
        .replace(['\u{201c}', '\u{201d}'], "\"")
}

/// End (exclusive) of the balanced object starting at `start`, string-aware.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_str = false;
    let mut escaped = false;
    for (i, &c) in bytes.iter().enumerate().skip(start) {
        if in_str {
            if escaped {
                escaped = false;
            } else if c == b'\\' {
                escaped = true;
            } else if c == b'"' {
                in_str = false;
            }
            continue;
        }
        match c {
            b'"' => in_str = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

fn remove_trailing_commas(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let chars: Vec<char> = s.chars().collect();
    let mut in_str = false;
    let mut escaped = false;
    for (i, &c) in chars.iter().enumerate() {
        if in_str {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_str = false;
            }
            continue;
        }
        if c == '"' {
            in_str = true;
        }
        if c == ',' {
            let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
            if matches!(next, Some('}') | Some(']')) {
                continue;
            }
        }
        out.push(c);
    }
    out
}

fn parse_object(candidate: &str) -> Option<Map<String, Value>> {
    let attempt = |s: &str| match serde_json::from_str::<Value>(s) {
        Ok(Value::Object(m)) => Some(m),
        _ => None,
    };
    attempt(candidate).or_else(|| attempt(&remove_trailing_commas(candidate)))
}

/// Every top-level JSON object in `text`, in order of appearance.
///
/// Code fences and `<think>` blocks are stripped first; an unparsable balanced
/// region is skipped so objects nested inside it can still be found.
pub fn extract_objects(text: &str) -> Vec<Map<String, Value>> {
    let cleaned = strip_noise(text);
    let bytes = cleaned.as_bytes();
    let mut found = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'{' {
            i += 1;
            continue;
        }
        match balanced_end(bytes, i).and_then(|end| parse_object(&cleaned[i..end]).map(|m| (m, end))) {
            Some((obj, end)) => {
                found.push(obj);
                i = end;
            }
            None => i += 1,
        }
    }
    found
}

fn string_items(v: &Value) -> Vec<String> {
    match v {
        Value::String(s) => s.split([',', ';']).map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect(),
        Value::Array(items) => items
            .iter()
            .filter_map(|i| match i {
                Value::String(s) => Some(s.clone()),
                Value::Object(o) => o.get("action").or_else(|| o.get("name")).and_then(|n| n.as_str()).map(str::to_string),
                _ => None,
            })
            .collect(),
        _ => Vec::new(),
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().trim_end_matches('%').parse().ok(),
        _ => None,
    }
    .filter(|x: &f64| x.is_finite())
}

fn label_from_object(obj: &Map<String, Value>) -> StructuredLabel {
    let mut label = StructuredLabel::default();

    if let Some(v) = obj.get("scenes").or_else(|| obj.get("scene")) {
        for name in string_items(v) {
            match name.parse::<Scene>() {
                Ok(s) => {
                    label.scenes.insert(s);
                }
                Err(_) => label.warnings.push(format!("unknown scene {name}")),
            }
        }
    }
    let mut inline_conf = BTreeMap::new();
    let mut inline_evidence = BTreeMap::new();
    if let Some(v) = obj.get("actions") {
        for name in string_items(v) {
            match name.parse::<Action>() {
                Ok(a) => {
                    label.actions.insert(a);
                }
                Err(_) => label.warnings.push(format!("unknown action {name}")),
            }
        }
        // actions given as objects may carry their own confidence and evidence
        if let Value::Array(items) = v {
            for item in items.iter().filter_map(Value::as_object) {
                let Some(a) = item
                    .get("action")
                    .or_else(|| item.get("name"))
                    .and_then(Value::as_str)
                    .and_then(|n| n.parse::<Action>().ok())
                else {
                    continue;
                };
                if let Some(c) = item.get("confidence").and_then(number) {
                    inline_conf.insert(a, c);
                }
                if let Some(e) = item.get("evidence").and_then(Value::as_str) {
                    inline_evidence.insert(a, e.to_string());
                }
            }
        }
    }
    if let Some(Value::Object(m)) = obj.get("confidences").or_else(|| obj.get("confidence")) {
        for (k, v) in m {
            match (k.parse::<Action>(), number(v)) {
                (Ok(a), Some(c)) => {
                    inline_conf.insert(a, c);
                }
                (Ok(a), None) => label.warnings.push(format!("non-numeric confidence for {a}")),
                (Err(_), _) => label.warnings.push(format!("unknown action {k} in confidences")),
            }
        }
    }
    if let Some(Value::Object(m)) = obj.get("evidence") {
        for (k, v) in m {
            if let Ok(a) = k.parse::<Action>() {
                let text = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                inline_evidence.insert(a, text);
            }
        }
    }
    for &a in &label.actions {
        let c = inline_conf.get(&a).copied().unwrap_or(DEFAULT_CONFIDENCE);
        label.confidences.insert(a, c.clamp(0.0, 1.0));
        if let Some(e) = inline_evidence.remove(&a) {
            label.evidence.insert(a, e);
        }
    }
    label
}

/// Reads the first label-shaped object (one with `scenes` or `actions`) out of a reply.
pub fn parse_structured_label(text: &str) -> Result<StructuredLabel, ParseFailure> {
    let objects = extract_objects(text);
    if objects.is_empty() {
        return Err(ParseFailure { raw: text.to_string(), reason: "no JSON object found".into() });
    }
    let keys = ["scenes", "scene", "actions"];
    objects
        .iter()
        .find(|o| keys.iter().any(|k| o.contains_key(*k)))
        .map(label_from_object)
        .ok_or_else(|| ParseFailure {
            raw: text.to_string(),
            reason: "no object with scenes or actions".into(),
        })
}
