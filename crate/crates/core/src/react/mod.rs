//! Reason-act-observe loop over a closed tool registry, followed by a
//! reflection pass that penalises scene-incompatible actions.

mod tools;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use tools::{ToolCall, ToolName, ToolOutput, Tools};

use crate::config::ReactConfig;
use crate::context::{label_to_record, Context};
use crate::ingest::FrameSequence;
use crate::prompts::fill;
use crate::record::{EvaluationUnit, LabelRecord};
use crate::tags;
use crate::vlm::{extract_objects, StructuredLabel};

/// One reasoning step as it appears in the scratchpad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScratchEntry {
    pub thought: String,
    pub action_name: String,
    pub action_input: String,
    pub observation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactState {
    pub unit_id: String,
    pub scratchpad: Vec<ScratchEntry>,
    pub step: usize,
    pub done: bool,
    /// Coding submitted with Finish, if it could be read.
    pub final_label: Option<StructuredLabel>,
    /// Latest ClassifyBehavior result.
    pub latest: Option<StructuredLabel>,
}

impl ReactState {
    pub fn new(unit_id: impl Into<String>) -> Self {
        ReactState { unit_id: unit_id.into(), scratchpad: Vec::new(), step: 0, done: false, final_label: None, latest: None }
    }

    pub fn scratchpad_text(&self) -> String {
        if self.scratchpad.is_empty() {
            return "(none yet)".into();
        }
        self.scratchpad
            .iter()
            .enumerate()
            .map(|(i, e)| {
                format!(
                    "{}. thought: {}\n   action: {} {}\n   observation: {}",
                    i + 1,
                    e.thought,
                    e.action_name,
                    e.action_input,
                    e.observation
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn observations(&self) -> String {
        self.scratchpad
            .iter()
            .filter(|e| e.action_name != ToolName::ClassifyBehavior.as_str())
            .map(|e| format!("{}: {}", e.action_name, e.observation))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// The full record of one unit's loop, as persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactTrace {
    pub unit_id: String,
    pub steps: Vec<ScratchEntry>,
    pub finished: bool,
    pub final_label: Option<StructuredLabel>,
    pub record: LabelRecord,
}

/// Reads `{thought, action, action_input}` from a reply.
pub fn parse_step_reply(text: &str) -> Option<(String, ToolCall)> {
    extract_objects(text).into_iter().find_map(|obj| {
        let name: ToolName = obj.get("action")?.as_str()?.parse().ok()?;
        let thought = obj.get("thought").and_then(Value::as_str).unwrap_or_default().to_string();
        let input = match obj.get("action_input") {
            None | Some(Value::Null) => String::new(),
            Some(Value::String(s)) => s.clone(),
            Some(v) => v.to_string(),
        };
        Some((thought, ToolCall { name, input }))
    })
}

/// Asks the model for the next tool call, runs it and appends the observation.
pub fn react_step(mut state: ReactState, tools: &Tools, max_steps: usize) -> ReactState {
    if state.done {
        return state;
    }
    let ctx = tools.ctx;
    let n = state.step + 1;
    let key = tags::react_step_key(&state.unit_id, n);
    let text = fill(
        &ctx.prompts.react,
        &[
            ("tag", &ctx.tag(&key)),
            ("duration_s", &format!("{}", tools.unit.duration_s)),
            ("n_frames", &tools.unit.frame_indices.len().to_string()),
            ("tools", &ToolName::registry_text()),
            ("step", &n.to_string()),
            ("max_steps", &max_steps.to_string()),
            ("scratchpad", &state.scratchpad_text()),
        ],
    );
    let entry = match ctx.vlm.complete(&ctx.request(text, &[])) {
        Err(e) => ScratchEntry {
            thought: String::new(),
            action_name: String::new(),
            action_input: String::new(),
            observation: format!("error: {e}"),
        },
        Ok(resp) => match parse_step_reply(&resp.text) {
            None => ScratchEntry {
                thought: String::new(),
                action_name: String::new(),
                action_input: resp.text.clone(),
                observation: format!("invalid action, choose from: {}", ToolName::names()),
            },
            Some((thought, call)) => {
                let out = tools.execute(&call, &state.observations(), state.latest.as_ref());
                match call.name {
                    ToolName::Finish => {
                        state.done = true;
                        state.final_label = out.label;
                    }
                    ToolName::ClassifyBehavior if out.label.is_some() => state.latest = out.label,
                    _ => {}
                }
                ScratchEntry { thought, action_name: call.name.to_string(), action_input: call.input, observation: out.observation }
            }
        },
    };
    state.scratchpad.push(entry);
    state.step = n;
    if state.step >= max_steps {
        state.done = true;
    }
    state
}

/// Calibrates a final coding: each action not allowed in any reported scene
/// loses `lambda` confidence (floored at 0) and is kept but flagged; the
/// record is flagged when anything was incompatible or any confidence ends
/// below the review threshold. Notes are appended to the evidence.
pub fn reflect(label: &StructuredLabel, state: &ReactState, cfg: &ReactConfig) -> LabelRecord {
    let mut record = label_to_record(&state.unit_id, label);
    for v in record.violations() {
        let before = record.confidences.get(&v.action).copied().unwrap_or(0.0);
        let after = (before - cfg.lambda).max(0.0);
        record.confidences.insert(v.action, after);
        let allowed: Vec<&str> = v.compatible.iter().map(|s| s.as_str()).collect();
        append_note(
            &mut record,
            v.action,
            &format!("reflection: allowed only in [{}]; confidence lowered from {before:.2} to {after:.2}", allowed.join(", ")),
        );
        record.flagged = true;
    }
    let low: Vec<_> = record.confidences.iter().filter(|(_, &c)| c < cfg.review_threshold).map(|(&a, _)| a).collect();
    for a in low {
        append_note(&mut record, a, &format!("reflection: confidence below {:.2}, needs review", cfg.review_threshold));
        record.flagged = true;
    }
    record
}

fn append_note(record: &mut LabelRecord, action: crate::taxonomy::Action, note: &str) {
    let e = record.evidence.entry(action).or_default();
    if !e.is_empty() {
        e.push_str(" | ");
    }
    e.push_str(note);
}

/// Runs the loop for one unit until Finish or `max_steps`, then reflects.
/// A loop that never finishes yields an empty flagged record.
pub fn run_react(ctx: &Context, unit: &EvaluationUnit, seq: &FrameSequence) -> (LabelRecord, ReactTrace) {
    let tools = Tools { ctx, unit, seq };
    let max_steps = ctx.cfg.react.max_steps;
    let mut state = ReactState::new(&unit.unit_id);
    while !state.done {
        state = react_step(state, &tools, max_steps);
    }
    let record = match &state.final_label {
        Some(l) => reflect(l, &state, &ctx.cfg.react),
        None => LabelRecord::flagged_empty(&unit.unit_id),
    };
    let finished = state.final_label.is_some();
    let trace = ReactTrace {
        unit_id: state.unit_id,
        steps: state.scratchpad,
        finished,
        final_label: state.final_label,
        record: record.clone(),
    };
    (record, trace)
}
