//! Keys of the fixture tags each strategy embeds in its prompts.
//!
//! The scripted mock provider routes replies by these keys, so the corpus
//! generator and the strategies must agree on them.

/// Single-call classification of one evaluation unit.
pub fn unit_key(unit_id: &str) -> String {
    unit_id.to_string()
}

/// Scene classification of the first frame of a content block.
pub fn scene_key(video: &str, frame: usize) -> String {
    format!("{video}/scene@{frame:04}")
}

/// Behavior classification of a scene segment (inclusive frame range).
pub fn segment_key(video: &str, start: usize, end: usize) -> String {
    format!("{video}/seg@{start:04}-{end:04}")
}

/// Step `n` (1-based) of a reasoning loop over one unit.
pub fn react_step_key(unit_id: &str, step: usize) -> String {
    format!("{unit_id}/step{step}")
}

/// The classification tool call inside a reasoning loop.
pub fn react_classify_key(unit_id: &str) -> String {
    format!("{unit_id}/classify")
}
