use serde::{Deserialize, Serialize};

use super::motion::{classify_motion_pattern, MotionPattern};
use super::shift::{compensate_shift, detect_shift_profiles, row_profile_gray};
use super::{ensure_same_size, VisionConfig, VisionError};
use crate::ingest::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CursorPoint {
    pub frame_index: usize,
    pub x: f64,
    pub y: f64,
}

/// Cursor positions localised by frame differencing, with the motion summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CursorTrajectory {
    pub points: Vec<CursorPoint>,
    pub pattern: MotionPattern,
    /// Fraction of consecutive frame pairs in which cursor motion was seen.
    pub activity_ratio: f64,
}

impl CursorTrajectory {
    pub fn empty() -> Self {
        CursorTrajectory { points: Vec::new(), pattern: MotionPattern::None, activity_ratio: 0.0 }
    }

    /// Axis-aligned bounds of all points as `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let first = self.points.first()?;
        Some(self.points.iter().fold((first.x, first.y, first.x, first.y), |(x0, y0, x1, y1), p| {
            (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y))
        }))
    }
}

/// Weighted centre of one polarity of a changed-pixel component.
#[derive(Debug, Clone, Copy)]
struct Part {
    x: f64,
    y: f64,
    area: usize,
}

/// A changed blob split into the side where the frame got darker (the glyph
/// arrived) and the side where it got lighter (the glyph left).
#[derive(Debug, Clone, Copy, Default)]
struct Blob {
    arrived: Option<Part>,
    left: Option<Part>,
}

#[derive(Default)]
struct Acc {
    sx: f64,
    sy: f64,
    n: usize,
}

impl Acc {
    fn add(&mut self, x: usize, y: usize) {
        self.sx += x as f64;
        self.sy += y as f64;
        self.n += 1;
    }

    fn part(&self, dy: f64) -> Option<Part> {
        (self.n > 0).then(|| Part { x: self.sx / self.n as f64, y: self.sy / self.n as f64 - dy, area: self.n })
    }
}

struct PairObservation {
    blobs: Vec<Blob>,
    mask_centroid: Option<(f64, f64)>,
}

/// Differences `b` against `a` after undoing any detected scroll and extracts
/// 4-connected changed components within the area band.
fn observe_pair(a: &Frame, b: &Frame, cfg: &VisionConfig) -> PairObservation {
    let w = a.width as usize;
    let h = a.height as usize;
    let ga = a.gray();
    let gb = b.gray();
    let shift = detect_shift_profiles(&row_profile_gray(&ga, w), &row_profile_gray(&gb, w), cfg);
    let offset = shift.applied_offset();
    let (gb_aligned, valid) = compensate_shift(&gb, w, offset);

    let thr = cfg.diff_threshold as i16;
    // 0 = unchanged, 1 = darker in b, 2 = lighter in b
    let mut mask = vec![0u8; w * h];
    let (mut mx, mut my, mut mn) = (0.0, 0.0, 0usize);
    for y in valid.clone() {
        for x in 0..w {
            let i = y * w + x;
            let d = gb_aligned[i] as i16 - ga[i] as i16;
            if d.abs() > thr {
                mask[i] = if d < 0 { 1 } else { 2 };
                mx += x as f64;
                my += y as f64;
                mn += 1;
            }
        }
    }

    let mut seen = vec![false; w * h];
    let mut blobs = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if mask[start] == 0 || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut arrived, mut left) = (Acc::default(), Acc::default());
        let mut area = 0usize;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            area += 1;
            if mask[i] == 1 {
                arrived.add(x, y);
            } else {
                left.add(x, y);
            }
            let mut visit = |j: usize| {
                if mask[j] != 0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if (cfg.min_blob_area..=cfg.max_blob_area).contains(&area) {
            // arrivals are in aligned coordinates; map back into b
            blobs.push(Blob { arrived: arrived.part(offset as f64), left: left.part(0.0) });
        }
    }
    let mask_centroid = (mn > 0).then(|| (mx / mn as f64, my / mn as f64));
    PairObservation { blobs, mask_centroid }
}

/// Nearest part to `reference`; ties go to the smaller area, then the top-left-most centre.
fn nearest(parts: impl Iterator<Item = Part>, reference: (f64, f64)) -> Option<Part> {
    parts.min_by(|p, q| {
        let dp = (p.x - reference.0).hypot(p.y - reference.1);
        let dq = (q.x - reference.0).hypot(q.y - reference.1);
        dp.total_cmp(&dq)
            .then(p.area.cmp(&q.area))
            .then(p.y.total_cmp(&q.y))
            .then(p.x.total_cmp(&q.x))
    })
}

/// Tracks the cursor through consecutive frame pairs.
///
/// Each changed component is split by polarity: pixels that got darker mark
/// where the (dark) pointer arrived in the later frame, pixels that got
/// lighter mark where it left the earlier one. The arrival nearest the last
/// known position (or `prior`, or the centroid of all changes) is taken as
/// the cursor in the later frame.
pub fn detect_cursor(
    frames: &[Frame],
    prior: Option<(f64, f64)>,
    cfg: &VisionConfig,
) -> Result<CursorTrajectory, VisionError> {
    if frames.len() < 2 {
        return Err(VisionError::TooFewFrames { needed: 2, got: frames.len() });
    }
    for f in &frames[1..] {
        ensure_same_size(&frames[0], f)?;
    }
    let mut points: Vec<CursorPoint> = Vec::new();
    let mut active_pairs = 0usize;
    for pair in frames.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let obs = observe_pair(a, b, cfg);
        let last = points.last().map(|p| (p.x, p.y)).or(prior);
        let Some(reference) = last.or(obs.mask_centroid) else { continue };

        let arrived = nearest(obs.blobs.iter().filter_map(|b| b.arrived), reference);
        let a_known = points.last().is_some_and(|p| p.frame_index == a.index);
        let mut moved = false;
        if !a_known {
            let anchor = arrived.map(|p| (p.x, p.y)).unwrap_or(reference);
            if let Some(left) = nearest(obs.blobs.iter().filter_map(|b| b.left), anchor) {
                points.push(CursorPoint { frame_index: a.index, x: left.x, y: left.y });
                moved = true;
            }
        }
        if let Some(p) = arrived {
            points.push(CursorPoint { frame_index: b.index, x: p.x, y: p.y });
            moved = true;
        }
        if moved {
            active_pairs += 1;
        }
    }
    let pattern = classify_motion_pattern(&points, cfg);
    let activity_ratio = active_pairs as f64 / (frames.len() - 1) as f64;
    Ok(CursorTrajectory { points, pattern, activity_ratio })
}
