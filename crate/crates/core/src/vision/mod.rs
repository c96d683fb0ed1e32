//! Deterministic pixel-level kernels: frame differencing, scroll detection,
//! cursor tracking, motion classification, keyframes and highlight overlays.
//!
//! Grayscale is always the unweighted channel mean rounded down.

mod cursor;
mod diff;
mod keyframe;
mod motion;
mod overlay;
mod shift;

use serde::{Deserialize, Serialize};

pub use cursor::{detect_cursor, CursorPoint, CursorTrajectory};
pub use diff::{changed_region, frame_diff_score, ChangedRegion, DiffScore};
pub use keyframe::{detect_keyframes, diff_profile};
pub use motion::{classify_motion_pattern, MotionPattern};
pub use overlay::{outline_pixels, overlay_highlight, AttentionBox, OUTLINE_RGB, OUTLINE_THICKNESS};
pub use shift::{compensate_shift, detect_vertical_shift, row_profile, ShiftResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VisionError {
    #[error("frame size mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("need at least {needed} frames, got {got}")]
    TooFewFrames { needed: usize, got: usize },
    #[error("box {0:?} is empty or outside the {1}x{2} frame")]
    BadBox(AttentionBox, u32, u32),
}

/// Tunables for the vision kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VisionConfig {
    /// Per-pixel gray difference above which a pixel counts as changed.
    pub diff_threshold: u8,
    pub min_blob_area: usize,
    pub max_blob_area: usize,
    pub keyframe_tau: f64,
    pub max_shift: u32,
    pub min_shift: u32,
    pub min_shift_correlation: f64,
    /// Share of rows with the largest fit residual ignored when scoring a shift.
    pub shift_trim: f64,
    /// Max pairwise displacement (px) for a trajectory to count as static.
    pub static_radius: f64,
    /// Share of path length along one axis required for a linear pattern.
    pub directionality: f64,
    /// Allowed backtrack against the dominant direction, as a share of that axis' path.
    pub max_backtrack: f64,
}

impl Default for VisionConfig {
    fn default() -> Self {
        VisionConfig {
            diff_threshold: 25,
            min_blob_area: 8,
            max_blob_area: 900,
            keyframe_tau: 0.12,
            max_shift: 120,
            min_shift: 4,
            min_shift_correlation: 0.9,
            shift_trim: 0.2,
            static_radius: 8.0,
            directionality: 0.7,
            max_backtrack: 0.1,
        }
    }
}

impl VisionConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_blob_area == 0 || self.min_blob_area > self.max_blob_area {
            return Err("blob area band must satisfy 0 < min <= max".into());
        }
        if !(0.0..=1.0).contains(&self.keyframe_tau) {
            return Err("keyframe tau must be in [0, 1]".into());
        }
        if !(-1.0..=1.0).contains(&self.min_shift_correlation) {
            return Err("shift correlation threshold must be in [-1, 1]".into());
        }
        if !(0.0..0.5).contains(&self.shift_trim) {
            return Err("shift trim must be in [0, 0.5)".into());
        }
        if !(0.5..=1.0).contains(&self.directionality) {
            return Err("directionality must be in [0.5, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.max_backtrack) {
            return Err("max backtrack must be in [0, 1]".into());
        }
        if self.static_radius < 0.0 {
            return Err("static radius must be non-negative".into());
        }
        Ok(())
    }
}

pub(crate) fn ensure_same_size(a: &crate::ingest::Frame, b: &crate::ingest::Frame) -> Result<(), VisionError> {
    if a.same_size(b) {
        Ok(())
    } else {
        Err(VisionError::DimensionMismatch(a.width, a.height, b.width, b.height))
    }
}
