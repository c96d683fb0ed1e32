use serde::{Deserialize, Serialize};

use super::{SceneSegment, WorkflowError};
use crate::context::{Context, Exchange};
use crate::ingest::FrameSequence;
use crate::prompts::{fill, scene_list};
use crate::tags;
use crate::taxonomy::Scene;
use crate::vision::detect_keyframes;

/// A content block between consecutive keyframes and how its scene was read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTrace {
    pub start_index: usize,
    pub end_index: usize,
    /// Scene the model reported, if any.
    pub reported: Option<Scene>,
    /// Scene used after filling failed blocks from their neighbours.
    pub scene: Scene,
    pub exchange: Option<Exchange>,
    pub error: Option<String>,
}

/// Merges adjacent segments with the same scene.
pub fn merge_segments(segments: &[SceneSegment]) -> Vec<SceneSegment> {
    let mut out: Vec<SceneSegment> = Vec::new();
    for s in segments {
        match out.last_mut() {
            Some(last) if last.scene == s.scene && last.end_index + 1 == s.start_index => {
                last.end_index = s.end_index;
                last.source_keyframes.extend(&s.source_keyframes);
                last.flagged |= s.flagged;
            }
            _ => out.push(s.clone()),
        }
    }
    for (i, s) in out.iter_mut().enumerate() {
        s.id = i;
    }
    out
}

fn ask_scene(ctx: &Context, seq: &FrameSequence, frame: usize) -> (Option<Scene>, Option<Exchange>, Option<String>) {
    let key = tags::scene_key(&seq.name, frame);
    let text = fill(&ctx.prompts.scene, &[("tag", &ctx.tag(&key)), ("scenes", &scene_list())]);
    let Some(f) = seq.get(frame) else {
        return (None, None, Some(format!("frame {frame} missing")));
    };
    match ctx.ask_label(&key, text, &[f]) {
        Ok((Some(label), ex)) => match label.scenes.iter().next() {
            Some(&s) => (Some(s), Some(ex), None),
            None => (None, Some(ex), Some("reply named no scene".into())),
        },
        Ok((None, ex)) => (None, Some(ex), Some("unparsable reply".into())),
        Err(e) => (None, None, Some(e.to_string())),
    }
}

/// Splits `seq` at keyframes, reads each block's scene from its first frame
/// and merges neighbouring blocks of the same scene.
///
/// A block whose scene cannot be read takes the previous block's scene and is
/// flagged; leading unreadable blocks take the first scene that was read. Fails only if no block
/// could be read at all.
pub fn osds_segment(ctx: &Context, seq: &FrameSequence) -> Result<(Vec<SceneSegment>, Vec<BlockTrace>), WorkflowError> {
    if seq.is_empty() {
        return Err(WorkflowError::EmptySequence(seq.name.clone()));
    }
    let keyframes = detect_keyframes(seq.frames(), ctx.cfg.vision.keyframe_tau);
    let bounds: Vec<(usize, usize)> = keyframes
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, keyframes.get(i + 1).map_or(seq.len() - 1, |&n| n - 1)))
        .collect();
    let answers: Vec<_> = bounds.iter().map(|&(start, _)| ask_scene(ctx, seq, start)).collect();
    let first_known = answers
        .iter()
        .find_map(|(s, _, _)| *s)
        .ok_or_else(|| WorkflowError::NoSceneRead(seq.name.clone()))?;
    let mut current = first_known;
    let mut traces = Vec::with_capacity(bounds.len());
    let mut blocks = Vec::with_capacity(bounds.len());
    for (i, (&(start, end), (reported, exchange, error))) in bounds.iter().zip(answers).enumerate() {
        if let Some(s) = reported {
            current = s;
        }
        blocks.push(SceneSegment {
            id: i,
            start_index: start,
            end_index: end,
            scene: current,
            source_keyframes: vec![start],
            flagged: reported.is_none(),
        });
        traces.push(BlockTrace { start_index: start, end_index: end, reported, scene: current, exchange, error });
    }
    Ok((merge_segments(&blocks), traces))
}
