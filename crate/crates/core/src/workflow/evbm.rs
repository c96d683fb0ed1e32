use serde::{Deserialize, Serialize};

use super::{ActionCandidate, SceneSegment, ValidationVerdict};
use crate::config::WorkflowConfig;
use crate::ingest::FrameSequence;
use crate::taxonomy::{is_compatible, Action, Scene};
use crate::vision::{changed_region, detect_vertical_shift, frame_diff_score, CursorTrajectory, MotionPattern, VisionConfig};

/// Pixel evidence measured over the frame pairs of one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentEvidence {
    pub pairs: usize,
    /// Pairs with a detected vertical content shift.
    pub shift_pairs: usize,
    /// Pairs with a small, non-scrolling change.
    pub localized_pairs: usize,
    pub max_diff: f64,
    /// Keyframes strictly after the segment's first frame.
    pub keyframes_inside: usize,
    pub cursor_points: usize,
    pub cursor_pattern: MotionPattern,
}

impl SegmentEvidence {
    pub fn measure(
        segment: &SceneSegment,
        seq: &FrameSequence,
        keyframes: &[usize],
        cursor: &CursorTrajectory,
        vision: &VisionConfig,
        cfg: &WorkflowConfig,
    ) -> Self {
        let frames = seq.slice(segment.start_index, segment.end_index);
        let mut ev = SegmentEvidence {
            pairs: frames.len().saturating_sub(1),
            shift_pairs: 0,
            localized_pairs: 0,
            max_diff: 0.0,
            keyframes_inside: keyframes.iter().filter(|&&k| k > segment.start_index && k <= segment.end_index).count(),
            cursor_points: cursor.points.len(),
            cursor_pattern: cursor.pattern,
        };
        let (w, h) = seq.dimensions().unwrap_or((1, 1));
        let frame_area = w as f64 * h as f64;
        for pair in frames.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let diff = frame_diff_score(a, b).map_or(0.0, |d| d.value());
            ev.max_diff = ev.max_diff.max(diff);
            let shifted = detect_vertical_shift(a, b, vision).is_ok_and(|s| s.detected);
            if shifted {
                ev.shift_pairs += 1;
                continue;
            }
            if diff < cfg.localized_min_diff {
                continue;
            }
            if let Ok(Some(region)) = changed_region(a, b, vision.diff_threshold) {
                if (region.bbox_area() as f64) < cfg.localized_max_area * frame_area {
                    ev.localized_pairs += 1;
                }
            }
        }
        ev
    }
}

/// Named checks an action's candidate must pass, each with its outcome.
pub fn required_signals(action: Action, scene: Scene, ev: &SegmentEvidence, evidence_text: &str, cfg: &WorkflowConfig) -> Vec<(&'static str, bool)> {
    use MotionPattern as P;
    let pattern = ev.cursor_pattern;
    match action {
        Action::ReadingWithScrolling => vec![
            ("vertical-shift-in-2-pairs", ev.shift_pairs >= 2),
            ("cursor-static-or-absent", matches!(pattern, P::Static | P::None)),
        ],
        Action::ReadingWithHighlighting => vec![
            ("cursor-linear-horizontal", pattern == P::LinearHorizontal),
            ("no-vertical-shift", ev.shift_pairs == 0),
        ],
        Action::Freezing => vec![
            ("no-cursor", ev.cursor_points == 0),
            ("all-diffs-below-freeze-threshold", ev.max_diff < cfg.freeze_max_diff),
        ],
        Action::GroupDocumentCoEditing => {
            vec![("scene-docs", scene == Scene::Docs), ("localized-diffs-in-3-pairs", ev.localized_pairs >= 3)]
        }
        Action::PromptingGai => {
            vec![("scene-gai", scene == Scene::Gai), ("localized-diffs-in-2-pairs", ev.localized_pairs >= 2)]
        }
        Action::SearchingInternet => vec![
            ("scene-web", scene == Scene::Web),
            ("keyframe-or-localized-diffs-in-2-pairs", ev.keyframes_inside >= 1 || ev.localized_pairs >= 2),
        ],
        Action::TickingAnswers => {
            vec![("scene-docs", scene == Scene::Docs), ("localized-diff-in-1-pair", ev.localized_pairs >= 1)]
        }
        Action::CopyAndPaste => vec![
            ("cursor-linear-horizontal-or-jump", matches!(pattern, P::LinearHorizontal | P::Jump)),
            ("evidence-text-present", !evidence_text.trim().is_empty()),
        ],
    }
}

/// Accepts or rejects each candidate against the segment's evidence.
///
/// Scene-incompatible candidates are always rejected. Otherwise a candidate
/// is kept when every required signal holds, or when its confidence reaches
/// the override level.
pub fn evbm_validate(
    candidates: &[ActionCandidate],
    segment: &SceneSegment,
    evidence: &SegmentEvidence,
    cfg: &WorkflowConfig,
) -> Vec<ValidationVerdict> {
    candidates
        .iter()
        .map(|c| {
            if !is_compatible(c.action, segment.scene) {
                return ValidationVerdict { candidate: c.clone(), kept: false, reasons: vec!["scene-incompatible".into()] };
            }
            let signals = required_signals(c.action, segment.scene, evidence, &c.evidence_text, cfg);
            let mut reasons: Vec<String> = signals
                .iter()
                .map(|(name, ok)| format!("{}:{name}", if *ok { "satisfied" } else { "failed" }))
                .collect();
            let all = signals.iter().all(|(_, ok)| *ok);
            let kept = if all {
                true
            } else if c.confidence >= cfg.override_confidence {
                reasons.push(format!("override:confidence {:.2} >= {:.2}", c.confidence, cfg.override_confidence));
                true
            } else {
                false
            };
            ValidationVerdict { candidate: c.clone(), kept, reasons }
        })
        .collect()
}
