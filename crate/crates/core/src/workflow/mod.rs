//! Three-agent workflow: scene segmentation (OSDS), cursor-informed
//! behavior classification (ICVP) and evidence-based validation (EVBM).

mod evbm;
mod icvp;
mod osds;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use evbm::{evbm_validate, required_signals, SegmentEvidence};
pub use icvp::{cursor_summary, icvp_classify, sample_segment_frames, segment_cursor, IcvpOutcome};
pub use osds::{merge_segments, osds_segment, BlockTrace};

use crate::context::{Context, Exchange};
use crate::ingest::FrameSequence;
use crate::record::{EvaluationUnit, LabelRecord};
use crate::taxonomy::{Action, Scene};
use crate::vision::{detect_keyframes, CursorTrajectory, MotionPattern};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorkflowError {
    #[error("video {0} has no frames")]
    EmptySequence(String),
    #[error("video {0}: no content block could be assigned a scene")]
    NoSceneRead(String),
}

/// A run of frames showing one scene (inclusive bounds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSegment {
    pub id: usize,
    pub start_index: usize,
    pub end_index: usize,
    pub scene: Scene,
    pub source_keyframes: Vec<usize>,
    /// Some block's scene was inferred rather than read.
    #[serde(default)]
    pub flagged: bool,
}

impl SceneSegment {
    pub fn len(&self) -> usize {
        self.end_index - self.start_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionCandidate {
    pub action: Action,
    pub confidence: f64,
    pub evidence_text: String,
    pub cursor_pattern: MotionPattern,
    pub segment_ref: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationVerdict {
    pub candidate: ActionCandidate,
    pub kept: bool,
    pub reasons: Vec<String>,
}

/// Everything the workflow did for one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentTrace {
    pub segment: SceneSegment,
    pub cursor: CursorTrajectory,
    pub evidence: SegmentEvidence,
    pub exchange: Option<Exchange>,
    pub verdicts: Vec<ValidationVerdict>,
    pub error: Option<String>,
}

impl SegmentTrace {
    fn flagged(&self) -> bool {
        self.segment.flagged || self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowTrace {
    pub video: String,
    pub keyframes: Vec<usize>,
    pub blocks: Vec<BlockTrace>,
    pub segments: Vec<SegmentTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowOutput {
    /// Final records, one per unit, built from validated candidates.
    pub records: Vec<LabelRecord>,
    /// The same records built from every candidate, before validation.
    pub candidate_records: Vec<LabelRecord>,
    pub trace: WorkflowTrace,
}

fn process_segment(ctx: &Context, seq: &FrameSequence, keyframes: &[usize], segment: SceneSegment) -> SegmentTrace {
    match icvp_classify(ctx, &segment, seq) {
        Ok(outcome) => {
            let evidence =
                SegmentEvidence::measure(&segment, seq, keyframes, &outcome.cursor, &ctx.cfg.vision, &ctx.cfg.workflow);
            let verdicts = evbm_validate(&outcome.candidates, &segment, &evidence, &ctx.cfg.workflow);
            SegmentTrace {
                segment,
                cursor: outcome.cursor,
                evidence,
                exchange: Some(outcome.exchange),
                verdicts,
                error: outcome.flagged.then(|| "unparsable reply".to_string()),
            }
        }
        Err(e) => {
            let cursor = segment_cursor(ctx, &segment, seq);
            let evidence = SegmentEvidence::measure(&segment, seq, keyframes, &cursor, &ctx.cfg.vision, &ctx.cfg.workflow);
            SegmentTrace { segment, cursor, evidence, exchange: None, verdicts: Vec::new(), error: Some(e.to_string()) }
        }
    }
}

/// Builds one record per unit from the segments overlapping it: the union of
/// their scenes, the actions `keep` admits, the highest confidence per action
/// and the evidence texts joined in segment order.
pub fn assemble_records(
    units: &[EvaluationUnit],
    segments: &[SegmentTrace],
    keep: impl Fn(&ValidationVerdict) -> bool,
) -> Vec<LabelRecord> {
    units
        .iter()
        .map(|u| {
            let mut record = LabelRecord::new(&u.unit_id);
            let mut evidence: BTreeMap<Action, Vec<String>> = BTreeMap::new();
            for t in segments.iter().filter(|t| u.overlaps(t.segment.start_index, t.segment.end_index)) {
                record.scenes.insert(t.segment.scene);
                record.flagged |= t.flagged();
                for v in t.verdicts.iter().filter(|v| keep(v)) {
                    let c = &v.candidate;
                    record.actions.insert(c.action);
                    let conf = record.confidences.entry(c.action).or_insert(0.0);
                    *conf = conf.max(c.confidence);
                    if !c.evidence_text.is_empty() {
                        evidence.entry(c.action).or_default().push(c.evidence_text.clone());
                    }
                }
            }
            record.evidence = evidence.into_iter().map(|(a, e)| (a, e.join("; "))).collect();
            record
        })
        .collect()
}

/// Runs segmentation once for the video, then classification and validation
/// per segment (in parallel), and maps the results onto `units`.
pub fn run_workflow(ctx: &Context, seq: &FrameSequence, units: &[EvaluationUnit]) -> Result<WorkflowOutput, WorkflowError> {
    let (segments, blocks) = osds_segment(ctx, seq)?;
    let keyframes = detect_keyframes(seq.frames(), ctx.cfg.vision.keyframe_tau);
    let traces: Vec<SegmentTrace> =
        segments.into_par_iter().map(|s| process_segment(ctx, seq, &keyframes, s)).collect();
    let records = assemble_records(units, &traces, |v| v.kept);
    let candidate_records = assemble_records(units, &traces, |_| true);
    Ok(WorkflowOutput {
        records,
        candidate_records,
        trace: WorkflowTrace { video: seq.name.clone(), keyframes, blocks, segments: traces },
    })
}
