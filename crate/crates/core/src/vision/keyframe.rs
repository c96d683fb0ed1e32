use super::diff::gray_diff;
use crate::ingest::Frame;

/// Diff score between each frame and its predecessor; entry 0 is 0.
pub fn diff_profile(frames: &[Frame]) -> Vec<f64> {
    let grays: Vec<Vec<u8>> = frames.iter().map(Frame::gray).collect();
    std::iter::once(0.0)
        .chain(grays.windows(2).map(|w| gray_diff(&w[0], &w[1])))
        .take(frames.len())
        .collect()
}

/// Frame indices that start a new content block: the first frame plus every
/// frame differing from its predecessor by more than `tau`.
pub fn detect_keyframes(frames: &[Frame], tau: f64) -> Vec<usize> {
    diff_profile(frames)
        .into_iter()
        .zip(frames)
        .enumerate()
        .filter(|&(i, (score, _))| i == 0 || score > tau)
        .map(|(_, (_, f))| f.index)
        .collect()
}
