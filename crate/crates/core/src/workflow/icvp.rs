use super::{ActionCandidate, SceneSegment};
use crate::context::{sample_evenly, Context, Exchange};
use crate::ingest::{Frame, FrameSequence};
use crate::prompts::fill;
use crate::tags;
use crate::vision::{detect_cursor, overlay_highlight, AttentionBox, CursorTrajectory};
use crate::vlm::VlmError;

/// Result of classifying one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct IcvpOutcome {
    pub candidates: Vec<ActionCandidate>,
    pub cursor: CursorTrajectory,
    pub exchange: Exchange,
    /// Both replies were unparsable.
    pub flagged: bool,
}

/// Cursor trajectory over the segment; empty for single-frame segments.
pub fn segment_cursor(ctx: &Context, segment: &SceneSegment, seq: &FrameSequence) -> CursorTrajectory {
    let frames = seq.slice(segment.start_index, segment.end_index);
    detect_cursor(frames, None, &ctx.cfg.vision).unwrap_or_else(|_| CursorTrajectory::empty())
}

/// Text block describing position, movement pattern and temporal spread of the cursor.
pub fn cursor_summary(traj: &CursorTrajectory) -> String {
    let positions = if traj.points.is_empty() {
        "none detected".to_string()
    } else {
        traj.points
            .iter()
            .map(|p| format!("frame {}: ({:.0}, {:.0})", p.frame_index, p.x, p.y))
            .collect::<Vec<_>>()
            .join("; ")
    };
    format!(
        "positions: {positions}\npattern: {}\nactivity ratio: {:.2} of frame pairs show cursor motion",
        traj.pattern, traj.activity_ratio
    )
}

/// Every `stride`-th frame of the segment, evenly thinned to the image budget.
pub fn sample_segment_frames(segment: &SceneSegment, stride: usize, budget: usize) -> Vec<usize> {
    let strided: Vec<usize> = (segment.start_index..=segment.end_index).step_by(stride.max(1)).collect();
    sample_evenly(&strided, budget)
}

/// Classifies the behavior in one scene segment with cursor evidence, scene
/// guidance and frames outlined around the cursor's area of activity.
pub fn icvp_classify(ctx: &Context, segment: &SceneSegment, seq: &FrameSequence) -> Result<IcvpOutcome, VlmError> {
    let cursor = segment_cursor(ctx, segment, seq);
    let positions = sample_segment_frames(segment, ctx.cfg.workflow.frame_stride, ctx.cfg.image_budget);
    let (w, h) = seq.dimensions().unwrap_or((0, 0));
    let attention = cursor
        .bounds()
        .and_then(|(x0, y0, x1, y1)| AttentionBox::around(x0, y0, x1, y1, ctx.cfg.workflow.attention_pad as f64, w, h));
    let frames: Vec<Frame> = positions
        .iter()
        .filter_map(|&i| seq.get(i))
        .map(|f| match &attention {
            Some(b) => overlay_highlight(f, b).unwrap_or_else(|_| f.clone()),
            None => f.clone(),
        })
        .collect();
    let key = tags::segment_key(&seq.name, segment.start_index, segment.end_index);
    let scene = segment.scene.as_str();
    let text = fill(
        &ctx.prompts.icvp,
        &[
            ("tag", &ctx.tag(&key)),
            ("n_images", &frames.len().to_string()),
            ("scene", scene),
            ("start", &segment.start_index.to_string()),
            ("end", &segment.end_index.to_string()),
            ("stride", &ctx.cfg.workflow.frame_stride.to_string()),
            ("cursor", &cursor_summary(&cursor)),
            ("guidance", ctx.prompts.guidance.get(&segment.scene).map_or("", String::as_str)),
        ],
    );
    let refs: Vec<&Frame> = frames.iter().collect();
    let (label, exchange) = ctx.ask_label(&key, text, &refs)?;
    let flagged = label.is_none();
    let candidates = label
        .map(|l| {
            l.actions
                .iter()
                .map(|&a| ActionCandidate {
                    action: a,
                    confidence: l.confidence(a).clamp(0.0, 1.0),
                    evidence_text: l.evidence.get(&a).cloned().unwrap_or_default(),
                    cursor_pattern: cursor.pattern,
                    segment_ref: segment.id,
                })
                .collect()
        })
        .unwrap_or_default();
    Ok(IcvpOutcome { candidates, cursor, exchange, flagged })
}
