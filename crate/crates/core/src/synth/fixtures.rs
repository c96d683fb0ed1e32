//! Small seeded fixtures with known ground truth for the vision kernels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::render::{render, text_lines, Layout, Page, TOP_MARGIN};
use super::{GLYPH_H, GLYPH_W};
use crate::ingest::Frame;
use crate::taxonomy::Scene;
use crate::vision::MotionPattern;

const W: u32 = 320;
const H: u32 = 256;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_scene(rng: &mut ChaCha8Rng) -> Scene {
    Scene::ALL[rng.random_range(0..Scene::ALL.len())]
}

fn frames_from(layout: &Layout, lines: &[super::render::TextLine], pages: &[Page]) -> Vec<Frame> {
    pages
        .iter()
        .enumerate()
        .map(|(i, p)| Frame::new(i, i as f64, layout.width, layout.height, render(layout, lines, p)))
        .collect()
}

/// Pointer bounds `(x0, y0, x1, y1)` that stay clear of compensation margins.
fn bounds(layout: &Layout) -> (i32, i32, i32, i32) {
    (layout.work_x0, TOP_MARGIN as i32 + 48, layout.work_x1 - GLYPH_W, layout.height as i32 - GLYPH_H - 48)
}

/// Frames with a moving pointer and its true centroid in every frame.
#[derive(Debug, Clone)]
pub struct CursorCase {
    pub frames: Vec<Frame>,
    pub truth: Vec<(f64, f64)>,
    /// Per-frame body-text scroll applied since the previous frame.
    pub scroll_px: i32,
}

impl CursorCase {
    /// Frames where the pointer differs from a neighbouring frame.
    pub fn moving_frames(&self) -> Vec<usize> {
        let n = self.truth.len();
        (0..n)
            .filter(|&i| (i > 0 && self.truth[i] != self.truth[i - 1]) || (i + 1 < n && self.truth[i] != self.truth[i + 1]))
            .collect()
    }
}

/// A pointer taking eight random steps of 20–40 px over a page whose text
/// scrolls up by `scroll_px` each frame.
pub fn cursor_case(seed: u64, scroll_px: i32) -> CursorCase {
    let mut rng = rng_for(seed, 1);
    let layout = Layout::new(random_scene(&mut rng), W, H);
    let lines = text_lines(&mut rng, &layout, H as i32 + 12 * scroll_px.abs());
    let (x0, y0, x1, y1) = bounds(&layout);
    let mut pos = (rng.random_range(x0..=x1), rng.random_range(y0..=y1));
    let mut pages = vec![Page { cursor: Some(pos), ..Page::default() }];
    for i in 1..8 {
        let next = loop {
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let r = rng.random_range(20.0..40.0);
            let p = (pos.0 + (r * angle.cos()).round() as i32, pos.1 + (r * angle.sin()).round() as i32);
            // the glyphs must not overlap once the scroll is undone
            let apart = (p.0 - pos.0).abs() >= GLYPH_W || (p.1 + scroll_px - pos.1).abs() >= GLYPH_H;
            if (x0..=x1).contains(&p.0) && (y0..=y1).contains(&p.1) && apart {
                break p;
            }
        };
        pos = next;
        pages.push(Page { scroll: scroll_px * i, cursor: Some(pos), ..Page::default() });
    }
    let truth = pages.iter().map(|p| p.cursor_centroid().expect("pointer always drawn")).collect();
    CursorCase { frames: frames_from(&layout, &lines, &pages), truth, scroll_px }
}

/// Frames whose pointer motion follows `pattern` by construction.
#[derive(Debug, Clone)]
pub struct MotionCase {
    pub frames: Vec<Frame>,
    pub expected: MotionPattern,
}

/// Static: the pointer rests while the text scrolls. Linear patterns step
/// along one axis with at most 1 px of wobble on the other. Jump alternates
/// direction on both axes with steps of 40–80 px. None: nothing changes.
pub fn motion_case(seed: u64, pattern: MotionPattern) -> MotionCase {
    let mut rng = rng_for(seed, 2);
    let layout = Layout::new(random_scene(&mut rng), W, H);
    let lines = text_lines(&mut rng, &layout, H as i32 + 8 * 40);
    let (x0, y0, x1, y1) = bounds(&layout);
    let n = 8;
    let mut pages = Vec::with_capacity(n);
    match pattern {
        MotionPattern::Static => {
            let pos = (rng.random_range(x0..=x1), rng.random_range(y0..=y1));
            let mut scroll = 0;
            for _ in 0..n {
                pages.push(Page { scroll, cursor: Some(pos), ..Page::default() });
                scroll += rng.random_range(20..=36);
            }
        }
        MotionPattern::LinearHorizontal => {
            let right = rng.random_bool(0.5);
            let mut x = if right { x0 + rng.random_range(0..8) } else { x1 - rng.random_range(0..8) };
            let y = rng.random_range(y0 + 1..=y1 - 1);
            for _ in 0..n {
                pages.push(Page { cursor: Some((x, y + rng.random_range(-1..=1))), ..Page::default() });
                let step = rng.random_range(12..=16);
                x += if right { step } else { -step };
            }
        }
        MotionPattern::LinearVertical => {
            let down = rng.random_bool(0.5);
            let (top, bottom) = (TOP_MARGIN as i32 + 4, H as i32 - GLYPH_H - 4);
            let mut y = if down { top + rng.random_range(0..8) } else { bottom - rng.random_range(0..8) };
            let x = rng.random_range(x0 + 1..=x1 - 1);
            for _ in 0..n {
                pages.push(Page { cursor: Some((x + rng.random_range(-1..=1), y)), ..Page::default() });
                let step = rng.random_range(18..=24);
                y += if down { step } else { -step };
            }
        }
        MotionPattern::Jump => {
            let (cx, cy) = ((x0 + x1) / 2, (y0 + y1) / 2);
            let (sx, sy) = (if rng.random_bool(0.5) { 1 } else { -1 }, if rng.random_bool(0.5) { 1 } else { -1 });
            for i in 0..n {
                let side = if i % 2 == 0 { 1 } else { -1 };
                let x = cx + sx * side * rng.random_range(20..=40);
                let y = cy + sy * side * rng.random_range(20..=40);
                pages.push(Page { cursor: Some((x.clamp(x0, x1), y.clamp(y0, y1))), ..Page::default() });
            }
        }
        MotionPattern::None => {
            let pos = (rng.random_range(x0..=x1), rng.random_range(y0..=y1));
            pages = vec![Page { cursor: Some(pos), ..Page::default() }; n];
        }
    }
    MotionCase { frames: frames_from(&layout, &lines, &pages), expected: pattern }
}

/// Two frames of the same page with the body text moved up by `offset` px (negative: down).
pub fn shift_case(seed: u64, offset: i32) -> (Frame, Frame) {
    let mut rng = rng_for(seed, 3);
    let layout = Layout::new(random_scene(&mut rng), W, H);
    let lines = text_lines(&mut rng, &layout, H as i32 + 200);
    let base = 60;
    let a = Page { scroll: base, ..Page::default() };
    let b = Page { scroll: base + offset, ..Page::default() };
    let frames = frames_from(&layout, &lines, &[a, b]);
    (frames[0].clone(), frames[1].clone())
}
