use serde::{Deserialize, Serialize};

use super::{ensure_same_size, VisionError};
use crate::ingest::Frame;

/// Mean absolute grayscale difference scaled to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DiffScore(pub f64);

impl DiffScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn frame_diff_score(a: &Frame, b: &Frame) -> Result<DiffScore, VisionError> {
    ensure_same_size(a, b)?;
    Ok(DiffScore(gray_diff(&a.gray(), &b.gray())))
}

pub(crate) fn gray_diff(a: &[u8], b: &[u8]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let total: u64 = a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y) as u64).sum();
    total as f64 / (a.len() as f64 * 255.0)
}

/// Pixels whose gray difference exceeds a threshold, summarised by count and bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangedRegion {
    pub count: usize,
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl ChangedRegion {
    pub fn bbox_area(&self) -> u64 {
        (self.x1 - self.x0 + 1) as u64 * (self.y1 - self.y0 + 1) as u64
    }
}

pub fn changed_region(a: &Frame, b: &Frame, threshold: u8) -> Result<Option<ChangedRegion>, VisionError> {
    ensure_same_size(a, b)?;
    let (ga, gb) = (a.gray(), b.gray());
    let w = a.width as usize;
    let mut region: Option<ChangedRegion> = None;
    for (i, (&x, &y)) in ga.iter().zip(&gb).enumerate() {
        if x.abs_diff(y) <= threshold {
            continue;
        }
        let (px, py) = ((i % w) as u32, (i / w) as u32);
        region = Some(match region {
            None => ChangedRegion { count: 1, x0: px, y0: py, x1: px, y1: py },
            Some(r) => ChangedRegion {
                count: r.count + 1,
                x0: r.x0.min(px),
                y0: r.y0.min(py),
                x1: r.x1.max(px),
                y1: r.y1.max(py),
            },
        });
    }
    Ok(region)
}
