use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::context::{label_to_record, sample_evenly, Context};
use crate::ingest::{Frame, FrameSequence};
use crate::prompts::fill;
use crate::record::EvaluationUnit;
use crate::tags;
use crate::vision::{detect_cursor, detect_vertical_shift, diff_profile, CursorTrajectory};
use crate::vlm::{parse_structured_label, StructuredLabel};
use crate::workflow::cursor_summary;

/// The closed set of tools the loop may call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ToolName {
    SegmentProbe,
    CursorProbe,
    ShiftProbe,
    ClassifyBehavior,
    CompatibilityCheck,
    Finish,
}

impl ToolName {
    pub const ALL: [ToolName; 6] = [
        ToolName::SegmentProbe,
        ToolName::CursorProbe,
        ToolName::ShiftProbe,
        ToolName::ClassifyBehavior,
        ToolName::CompatibilityCheck,
        ToolName::Finish,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ToolName::SegmentProbe => "SegmentProbe",
            ToolName::CursorProbe => "CursorProbe",
            ToolName::ShiftProbe => "ShiftProbe",
            ToolName::ClassifyBehavior => "ClassifyBehavior",
            ToolName::CompatibilityCheck => "CompatibilityCheck",
            ToolName::Finish => "Finish",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ToolName::SegmentProbe => "frame-to-frame change scores and content-block boundaries within this clip; input ignored",
            ToolName::CursorProbe => "cursor positions, movement pattern and activity ratio in this clip; input ignored",
            ToolName::ShiftProbe => "frame pairs where page content moved vertically (scrolling); input ignored",
            ToolName::ClassifyBehavior => "look at the clip's frames and propose scenes and actions; input: optional notes",
            ToolName::CompatibilityCheck => "check a coding against the allowed scenes of each action; input: a coding object, or empty for the latest classification",
            ToolName::Finish => "submit the final coding; input: the coding object",
        }
    }

    pub fn registry_text() -> String {
        Self::ALL.iter().map(|t| format!("- {}: {}", t.as_str(), t.description())).collect::<Vec<_>>().join("\n")
    }

    pub fn names() -> String {
        Self::ALL.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for ToolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ToolName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|t| t.as_str().eq_ignore_ascii_case(s.trim())).ok_or_else(|| s.to_string())
    }
}

/// A tool invocation requested by the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub name: ToolName,
    pub input: String,
}

/// What a tool returned: text for the scratchpad and, for classification
/// and Finish, the coding it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolOutput {
    pub observation: String,
    pub label: Option<StructuredLabel>,
}

impl ToolOutput {
    fn text(observation: String) -> Self {
        ToolOutput { observation, label: None }
    }
}

/// Tools bound to one unit of one video.
pub struct Tools<'a> {
    pub ctx: &'a Context<'a>,
    pub unit: &'a EvaluationUnit,
    pub seq: &'a FrameSequence,
}

impl<'a> Tools<'a> {
    fn frames(&self) -> Vec<&'a Frame> {
        self.unit.frame_indices.iter().filter_map(|&i| self.seq.get(i)).collect()
    }

    fn owned_frames(&self) -> Vec<Frame> {
        self.frames().into_iter().cloned().collect()
    }

    pub fn cursor(&self) -> CursorTrajectory {
        detect_cursor(&self.owned_frames(), None, &self.ctx.cfg.vision).unwrap_or_else(|_| CursorTrajectory::empty())
    }

    /// Runs `call`. `latest` is the most recent classification, used by
    /// CompatibilityCheck when called without input.
    pub fn execute(&self, call: &ToolCall, notes: &str, latest: Option<&StructuredLabel>) -> ToolOutput {
        match call.name {
            ToolName::SegmentProbe => ToolOutput::text(self.segment_probe()),
            ToolName::CursorProbe => ToolOutput::text(cursor_summary(&self.cursor())),
            ToolName::ShiftProbe => ToolOutput::text(self.shift_probe()),
            ToolName::ClassifyBehavior => self.classify(&format!("{notes}\n{}", call.input).trim().to_string()),
            ToolName::CompatibilityCheck => {
                let label = if call.input.trim().is_empty() {
                    latest.cloned()
                } else {
                    parse_structured_label(&call.input).ok()
                };
                ToolOutput::text(match label {
                    Some(l) => compatibility_text(&self.unit.unit_id, &l),
                    None => "nothing to check: give a coding object or call ClassifyBehavior first".into(),
                })
            }
            ToolName::Finish => match parse_structured_label(&call.input) {
                Ok(l) => ToolOutput { observation: "final coding accepted".into(), label: Some(l) },
                Err(_) => ToolOutput::text("final coding could not be read".into()),
            },
        }
    }

    fn segment_probe(&self) -> String {
        let owned = self.owned_frames();
        let profile = diff_profile(&owned);
        let tau = self.ctx.cfg.vision.keyframe_tau;
        let boundaries: Vec<String> = owned
            .iter()
            .zip(&profile)
            .skip(1)
            .filter(|(_, &d)| d > tau)
            .map(|(f, _)| f.index.to_string())
            .collect();
        let pairs: Vec<String> = owned
            .windows(2)
            .zip(profile.iter().skip(1))
            .map(|(w, d)| format!("{}->{}: {d:.4}", w[0].index, w[1].index))
            .collect();
        format!(
            "content blocks start after frames: [{}]\nchange scores: {}",
            boundaries.join(", "),
            if pairs.is_empty() { "none".into() } else { pairs.join("; ") }
        )
    }

    fn shift_probe(&self) -> String {
        let frames = self.frames();
        let mut hits = Vec::new();
        for w in frames.windows(2) {
            if let Ok(s) = detect_vertical_shift(w[0], w[1], &self.ctx.cfg.vision) {
                if s.detected {
                    hits.push(format!("{}->{}: {:+} px", w[0].index, w[1].index, s.offset_px));
                }
            }
        }
        let pairs = frames.len().saturating_sub(1);
        if hits.is_empty() {
            format!("no vertical content shift in {pairs} frame pairs")
        } else {
            format!("vertical content shift in {} of {pairs} frame pairs: {}", hits.len(), hits.join("; "))
        }
    }

    fn classify(&self, notes: &str) -> ToolOutput {
        let key = tags::react_classify_key(&self.unit.unit_id);
        let positions = sample_evenly(&self.unit.frame_indices, self.ctx.cfg.image_budget);
        let frames: Vec<&Frame> = positions.iter().filter_map(|&i| self.seq.get(i)).collect();
        let text = fill(
            &self.ctx.prompts.classify,
            &[
                ("tag", &self.ctx.tag(&key)),
                ("n_images", &frames.len().to_string()),
                ("notes", if notes.is_empty() { "(none)" } else { notes }),
            ],
        );
        match self.ctx.ask_label(&key, text, &frames) {
            Ok((Some(l), _)) => ToolOutput { observation: l.to_reply_json().to_string(), label: Some(l) },
            Ok((None, _)) => ToolOutput::text("classification failed: the reply could not be read".into()),
            Err(e) => ToolOutput::text(format!("classification failed: {e}")),
        }
    }
}

fn compatibility_text(unit_id: &str, label: &StructuredLabel) -> String {
    let violations = label_to_record(unit_id, label).violations();
    if violations.is_empty() {
        return "compatible: every action is allowed in the reported scenes".into();
    }
    let parts: Vec<String> = violations
        .iter()
        .map(|v| {
            let allowed: Vec<&str> = v.compatible.iter().map(|s| s.as_str()).collect();
            format!("{} needs one of [{}]", v.action, allowed.join(", "))
        })
        .collect();
    format!("incompatible: {}", parts.join("; "))
}
