use serde::{Deserialize, Serialize};

use super::{ensure_same_size, VisionConfig, VisionError};
use crate::ingest::Frame;

/// Estimated vertical content displacement between two frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftResult {
    /// Positive when content moved up (scrolled down the page).
    pub offset_px: i32,
    pub correlation: f64,
    pub detected: bool,
}

impl ShiftResult {
    pub const NONE: ShiftResult = ShiftResult { offset_px: 0, correlation: 0.0, detected: false };

    /// Offset to compensate by, zero when no shift was detected.
    pub fn applied_offset(&self) -> i32 {
        if self.detected {
            self.offset_px
        } else {
            0
        }
    }
}

/// Mean gray value of each row.
pub fn row_profile(frame: &Frame) -> Vec<f64> {
    row_profile_gray(&frame.gray(), frame.width as usize)
}

pub(crate) fn row_profile_gray(gray: &[u8], width: usize) -> Vec<f64> {
    gray.chunks_exact(width)
        .map(|row| row.iter().map(|&v| v as f64).sum::<f64>() / width as f64)
        .collect()
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 1e-12 || syy <= 1e-12 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Correlation after dropping the `trim` share of points lying furthest
/// from the least-squares line through all of them.
fn trimmed_pearson(xs: &[f64], ys: &[f64], trim: f64) -> f64 {
    let n = xs.len();
    let keep = n - ((n as f64 * trim).floor() as usize).min(n.saturating_sub(2));
    if keep == n {
        return pearson(xs, ys);
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (sxy, sxx) = xs.iter().zip(ys).fold((0.0, 0.0), |(sxy, sxx), (&x, &y)| (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx)));
    if sxx <= 1e-12 {
        return pearson(xs, ys);
    }
    let slope = sxy / sxx;
    let mut order: Vec<(f64, usize)> =
        xs.iter().zip(ys).enumerate().map(|(i, (&x, &y))| (((y - my) - slope * (x - mx)).abs(), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (kx, ky): (Vec<f64>, Vec<f64>) = order[..keep].iter().map(|&(_, i)| (xs[i], ys[i])).unzip();
    pearson(&kx, &ky)
}

/// Row pairs `(a_row, b_row)` overlapping when `b[y] = a[y + d]`.
fn overlap(h: usize, d: i32) -> (std::ops::Range<usize>, usize) {
    let start = (-d).max(0) as usize;
    let end = (h as i32 - d.max(0)) as usize;
    (start..end, (start as i32 + d) as usize)
}

/// Rows `[top, bottom)` left after removing leading and trailing bands that
/// are identical in both profiles, such as fixed toolbars.
fn scrolling_band(pa: &[f64], pb: &[f64]) -> std::ops::Range<usize> {
    let same = |y: usize| (pa[y] - pb[y]).abs() < 1e-9;
    let h = pa.len();
    let top = (0..h).find(|&y| !same(y)).unwrap_or(h);
    let bottom = (top..h).rev().find(|&y| !same(y)).map_or(top, |y| y + 1);
    top..bottom
}

/// Mean absolute difference of the profiles when `b[y] = a[y + d]`.
fn residual(pa: &[f64], pb: &[f64], d: i32) -> f64 {
    let (b_rows, a_start) = overlap(pa.len(), d);
    let len = b_rows.len().max(1);
    pb[b_rows].iter().zip(&pa[a_start..]).map(|(y, x)| (x - y).abs()).sum::<f64>() / len as f64
}

pub(crate) fn detect_shift_profiles(pa: &[f64], pb: &[f64], cfg: &VisionConfig) -> ShiftResult {
    let band = scrolling_band(pa, pb);
    let mut result = if band.len() >= 2 * cfg.min_shift as usize + 8 && band.len() < pa.len() {
        detect_shift_in(&pa[band.clone()], &pb[band], cfg)
    } else {
        detect_shift_in(pa, pb, cfg)
    };
    if result.detected && residual(pa, pb, result.offset_px) >= residual(pa, pb, 0) {
        result.detected = false;
    }
    result
}

fn detect_shift_in(pa: &[f64], pb: &[f64], cfg: &VisionConfig) -> ShiftResult {
    let h = pa.len();
    if h < 2 {
        return ShiftResult::NONE;
    }
    // keep at least half of the frame overlapping
    let max_shift = (cfg.max_shift as i32).min((h as i32 - 1) / 2);
    let mut best: Option<(f64, f64, i32)> = None;
    for d in -max_shift..=max_shift {
        let (b_rows, a_start) = overlap(h, d);
        let len = b_rows.len();
        let ys = &pb[b_rows];
        let xs = &pa[a_start..a_start + len];
        let corr = pearson(xs, ys);
        let mad = xs.iter().zip(ys).map(|(x, y)| (x - y).abs()).sum::<f64>() / len as f64;
        let better = match best {
            None => true,
            Some((bc, bm, bd)) => {
                if (corr - bc).abs() > 1e-9 {
                    corr > bc
                } else if (mad - bm).abs() > 1e-9 {
                    mad < bm
                } else {
                    (d.abs(), -d) < (bd.abs(), -bd)
                }
            }
        };
        if better {
            best = Some((corr, mad, d));
        }
    }
    let (_, _, offset_px) = best.expect("offset range is never empty");
    let (b_rows, a_start) = overlap(h, offset_px);
    let len = b_rows.len();
    let correlation = trimmed_pearson(&pa[a_start..a_start + len], &pb[b_rows], cfg.shift_trim);
    let detected = offset_px.unsigned_abs() >= cfg.min_shift && correlation >= cfg.min_shift_correlation;
    ShiftResult { offset_px, correlation, detected }
}

/// Finds the vertical offset maximising the normalised cross-correlation of
/// row profiles. The reported correlation at that offset ignores the
/// `shift_trim` share of worst-fitting rows, so a pointer or other small
/// static object over scrolling content does not mask the scroll. A shift
/// is only reported when it also leaves a smaller mean profile residual than
/// no shift, so content appearing in place is not mistaken for scrolling.
///
/// `max_shift` is capped below half the frame height.
pub fn detect_vertical_shift(a: &Frame, b: &Frame, cfg: &VisionConfig) -> Result<ShiftResult, VisionError> {
    ensure_same_size(a, b)?;
    Ok(detect_shift_profiles(&row_profile(a), &row_profile(b), cfg))
}

/// Moves `b` back by `offset` rows so its content lines up with the previous frame.
///
/// Returns the shifted gray image and the valid row range; rows outside it
/// have no source in `b`.
pub fn compensate_shift(gray_b: &[u8], width: usize, offset: i32) -> (Vec<u8>, std::ops::Range<usize>) {
    let h = gray_b.len() / width;
    let mut out = vec![0u8; gray_b.len()];
    let lo = offset.max(0) as usize;
    let hi = (h as i32 + offset.min(0)).max(0) as usize;
    for y in lo..hi {
        let src = (y as i32 - offset) as usize;
        out[y * width..(y + 1) * width].copy_from_slice(&gray_b[src * width..(src + 1) * width]);
    }
    (out, lo..hi.max(lo))
}
