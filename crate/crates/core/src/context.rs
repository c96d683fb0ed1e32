//! Shared state for the coding strategies.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::ingest::Frame;
use crate::prompts::PromptSet;
use crate::record::LabelRecord;
use crate::taxonomy::Action;
use crate::vlm::{complete_structured, fixture_tag, ChatRequest, LabelExchange, Message, StructuredLabel, VisionLanguageModel, VlmError};

/// Everything a strategy needs to talk to a model.
pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub prompts: &'a PromptSet,
    pub vlm: &'a dyn VisionLanguageModel,
}

/// One request/response round trip, kept for the trace files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub tag: String,
    pub prompt: String,
    pub images: Vec<usize>,
    pub replies: Vec<String>,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a RunConfig, prompts: &'a PromptSet, vlm: &'a dyn VisionLanguageModel) -> Self {
        Context { cfg, prompts, vlm }
    }

    /// The marker for `key`, or an empty string when tagging is off.
    pub fn tag(&self, key: &str) -> String {
        if self.cfg.fixture_tags {
            fixture_tag(key)
        } else {
            String::new()
        }
    }

    /// A system + user request with `frames` attached as PNG images.
    pub fn request(&self, text: String, frames: &[&Frame]) -> ChatRequest {
        let user = Message::user(text).with_images(frames.iter().map(|f| f.to_png()));
        ChatRequest::new(self.cfg.model_id.clone(), vec![Message::system(self.prompts.system_text()), user])
    }

    /// Sends a labelling request and records the exchange.
    pub fn ask_label(
        &self,
        key: &str,
        text: String,
        frames: &[&Frame],
    ) -> Result<(Option<StructuredLabel>, Exchange), VlmError> {
        let req = self.request(text.clone(), frames);
        let tag_key = self.cfg.fixture_tags.then_some(key);
        let LabelExchange { replies, label } = complete_structured(self.vlm, &req, tag_key)?;
        let exchange = Exchange { tag: key.to_string(), prompt: text, images: frames.iter().map(|f| f.index).collect(), replies };
        Ok((label, exchange))
    }
}

/// Up to `budget` items spread evenly over `items`, always keeping the first.
pub fn sample_evenly<T: Copy>(items: &[T], budget: usize) -> Vec<T> {
    if items.len() <= budget {
        return items.to_vec();
    }
    if budget == 0 {
        return Vec::new();
    }
    (0..budget).map(|k| items[k * items.len() / budget]).collect()
}

/// Turns a parsed reply into a prediction for `unit_id`.
///
/// Confidences are kept only for reported actions. A reply with no scene
/// cannot carry actions other than freezing; those are dropped and the
/// record is flagged.
pub fn label_to_record(unit_id: &str, label: &StructuredLabel) -> LabelRecord {
    let mut record = LabelRecord::with_labels(unit_id, label.scenes.iter().copied(), label.actions.iter().copied());
    if record.scenes.is_empty() && record.actions.iter().any(|&a| a != Action::Freezing) {
        record.actions.retain(|&a| a == Action::Freezing);
        record.flagged = true;
    }
    for &a in &record.actions {
        record.confidences.insert(a, label.confidence(a).clamp(0.0, 1.0));
        if let Some(e) = label.evidence.get(&a) {
            record.evidence.insert(a, e.clone());
        }
    }
    record
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::Scene;

    #[test]
    fn sampling_spreads_and_caps() {
        let v: Vec<usize> = (0..40).collect();
        assert_eq!(sample_evenly(&v, 4), vec![0, 10, 20, 30]);
        assert_eq!(sample_evenly(&v[..3], 20), vec![0, 1, 2]);
        assert_eq!(sample_evenly(&v, 20).len(), 20);
    }

    #[test]
    fn sceneless_labels_keep_only_freezing() {
        let label = StructuredLabel {
            actions: [Action::Freezing, Action::CopyAndPaste].into(),
            confidences: [(Action::CopyAndPaste, 0.7)].into(),
            ..Default::default()
        };
        let r = label_to_record("v/u00", &label);
        assert_eq!(r.actions, [Action::Freezing].into());
        assert!(r.flagged);
        assert!(r.validate().is_ok());
        assert_eq!(r.confidences[&Action::Freezing], 0.5);

        let ok = StructuredLabel { scenes: [Scene::Web].into(), actions: [Action::SearchingInternet].into(), ..Default::default() };
        let r = label_to_record("v/u01", &ok);
        assert!(!r.flagged);
        assert!(r.validate().is_ok());
    }
}
