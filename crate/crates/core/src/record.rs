//! Evaluation units and label records shared by every coding strategy.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::taxonomy::{check_compatibility, Action, Scene, Violation};

/// A fixed-length window of a video; the granularity at which labels are scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationUnit {
    pub unit_id: String,
    pub start_s: f64,
    pub duration_s: f64,
    /// Positions into the owning frame sequence.
    pub frame_indices: Vec<usize>,
}

impl EvaluationUnit {
    pub fn first_frame(&self) -> usize {
        self.frame_indices[0]
    }

    pub fn last_frame(&self) -> usize {
        *self.frame_indices.last().expect("units are never empty")
    }

    /// Inclusive frame range overlap test.
    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.first_frame() <= end && start <= self.last_frame()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecordError {
    #[error("unit {unit_id}: only freezing may have an empty scene set")]
    MissingScene { unit_id: String },
    #[error("unit {unit_id}: confidence given for {action} which is not among the actions")]
    DanglingConfidence { unit_id: String, action: Action },
    #[error("unit {unit_id}: confidence {value} for {action} is outside [0, 1]")]
    ConfidenceRange { unit_id: String, action: Action, value: f64 },
}

/// Gold or predicted labels for one evaluation unit.
///
/// Confidence, evidence and the review flag are only populated on predictions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LabelRecord {
    pub unit_id: String,
    #[serde(default)]
    pub scenes: BTreeSet<Scene>,
    #[serde(default)]
    pub actions: BTreeSet<Action>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub confidences: BTreeMap<Action, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub evidence: BTreeMap<Action, String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub flagged: bool,
}

impl LabelRecord {
    pub fn new(unit_id: impl Into<String>) -> Self {
        LabelRecord { unit_id: unit_id.into(), ..Default::default() }
    }

    pub fn with_labels(
        unit_id: impl Into<String>,
        scenes: impl IntoIterator<Item = Scene>,
        actions: impl IntoIterator<Item = Action>,
    ) -> Self {
        LabelRecord {
            unit_id: unit_id.into(),
            scenes: scenes.into_iter().collect(),
            actions: actions.into_iter().collect(),
            ..Default::default()
        }
    }

    /// An empty prediction marked for human review.
    pub fn flagged_empty(unit_id: impl Into<String>) -> Self {
        LabelRecord { unit_id: unit_id.into(), flagged: true, ..Default::default() }
    }

    pub fn violations(&self) -> Vec<Violation> {
        check_compatibility(&self.scenes, &self.actions)
    }

    pub fn validate(&self) -> Result<(), RecordError> {
        if self.scenes.is_empty() && self.actions.iter().any(|&a| a != Action::Freezing) {
            return Err(RecordError::MissingScene { unit_id: self.unit_id.clone() });
        }
        for (&action, &value) in &self.confidences {
            if !self.actions.contains(&action) {
                return Err(RecordError::DanglingConfidence { unit_id: self.unit_id.clone(), action });
            }
            if !(0.0..=1.0).contains(&value) {
                return Err(RecordError::ConfidenceRange {
                    unit_id: self.unit_id.clone(),
                    action,
                    value,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rules() {
        let ok = LabelRecord::with_labels("u", [], [Action::Freezing]);
        assert!(ok.validate().is_ok());
        let empty = LabelRecord::new("u");
        assert!(empty.validate().is_ok());
        let bad = LabelRecord::with_labels("u", [], [Action::CopyAndPaste]);
        assert!(matches!(bad.validate(), Err(RecordError::MissingScene { .. })));

        let mut dangling = LabelRecord::with_labels("u", [Scene::Web], [Action::SearchingInternet]);
        dangling.confidences.insert(Action::Freezing, 0.4);
        assert!(matches!(dangling.validate(), Err(RecordError::DanglingConfidence { .. })));
    }

    #[test]
    fn json_shape() {
        let mut r = LabelRecord::with_labels("v0/u00", [Scene::Web], [Action::SearchingInternet]);
        r.confidences.insert(Action::SearchingInternet, 0.9);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"{"unit_id":"v0/u00","scenes":["web"],"actions":["searching_internet"],"confidences":{"searching_internet":0.9}}"#
        );
        let back: LabelRecord = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn unit_overlap_is_inclusive() {
        let u = EvaluationUnit {
            unit_id: "u".into(),
            start_s: 20.0,
            duration_s: 20.0,
            frame_indices: (20..40).collect(),
        };
        assert!(u.overlaps(39, 50));
        assert!(u.overlaps(0, 20));
        assert!(!u.overlaps(40, 79));
        assert!(!u.overlaps(0, 19));
    }
}
