use serde::{Deserialize, Serialize};

use super::VisionError;
use crate::ingest::Frame;

pub const OUTLINE_THICKNESS: u32 = 3;
pub const OUTLINE_RGB: [u8; 3] = [255, 0, 0];

/// Region of interest highlighted for the vision-language model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttentionBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl AttentionBox {
    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.w > 0
            && self.h > 0
            && self.x.checked_add(self.w).is_some_and(|r| r <= width)
            && self.y.checked_add(self.h).is_some_and(|b| b <= height)
    }

    /// Box around `[x0, x1] x [y0, y1]` grown by `pad`, clamped to the frame.
    pub fn around(x0: f64, y0: f64, x1: f64, y1: f64, pad: f64, width: u32, height: u32) -> Option<Self> {
        let left = (x0 - pad).floor().clamp(0.0, width as f64 - 1.0) as u32;
        let top = (y0 - pad).floor().clamp(0.0, height as f64 - 1.0) as u32;
        let right = (x1 + pad).ceil().clamp(0.0, width as f64 - 1.0) as u32;
        let bottom = (y1 + pad).ceil().clamp(0.0, height as f64 - 1.0) as u32;
        let b = AttentionBox { x: left, y: top, w: right.saturating_sub(left) + 1, h: bottom.saturating_sub(top) + 1 };
        b.fits(width, height).then_some(b)
    }

    fn on_outline(&self, x: u32, y: u32) -> bool {
        let inside = x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h;
        inside
            && (x < self.x + OUTLINE_THICKNESS
                || x + OUTLINE_THICKNESS >= self.x + self.w
                || y < self.y + OUTLINE_THICKNESS
                || y + OUTLINE_THICKNESS >= self.y + self.h)
    }
}

/// Coordinates of the outline band drawn for `b`.
pub fn outline_pixels(b: &AttentionBox) -> Vec<(u32, u32)> {
    (b.y..b.y + b.h)
        .flat_map(|y| (b.x..b.x + b.w).map(move |x| (x, y)))
        .filter(|&(x, y)| b.on_outline(x, y))
        .collect()
}

/// Copy of `frame` with a red outline drawn just inside the box; the interior is untouched.
pub fn overlay_highlight(frame: &Frame, b: &AttentionBox) -> Result<Frame, VisionError> {
    if !b.fits(frame.width, frame.height) {
        return Err(VisionError::BadBox(*b, frame.width, frame.height));
    }
    let mut out = frame.clone();
    for (x, y) in outline_pixels(b) {
        out.set_pixel(x, y, OUTLINE_RGB);
    }
    Ok(out)
}
