//! Scene templates, page state and per-action behavior scripts.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::taxonomy::{Action, Scene};

pub const GLYPH_W: i32 = 12;
pub const GLYPH_H: i32 = 18;
const CURSOR_RGB: [u8; 3] = [10, 10, 10];
const WORD_RGB: [u8; 3] = [40, 40, 40];
const LINK_RGB: [u8; 3] = [30, 40, 150];
const VISITED_RGB: [u8; 3] = [60, 40, 140];
const BOX_RGB: [u8; 3] = [60, 60, 60];
const TEXT_DROP: u8 = 18;
const TINT: [u8; 3] = [0, 8, 25];
pub const TOP_MARGIN: u32 = 12;
const WORD_H: i32 = 9;
const LINE_STEP: i32 = 14;

/// Per-pair changed intensity aimed for by typing bursts, as a share of the frame's maximum.
const TYPING_TARGET: f64 = 0.0075;

/// Rows of the pointer glyph as `(row, x offset, width)`.
fn glyph_rows() -> impl Iterator<Item = (i32, i32, i32)> {
    (0..GLYPH_H).map(|r| if r < 12 { (r, 0, r + 1) } else { (r, 3, 4) })
}

/// Centre of mass of the glyph relative to its top-left corner.
pub fn glyph_centroid() -> (f64, f64) {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for (r, x0, w) in glyph_rows() {
        for dx in x0..x0 + w {
            sx += dx as f64;
            sy += r as f64;
            n += 1.0;
        }
    }
    (sx / n, sy / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: i32,
    pub y: i32,
    pub w: i32,
    pub h: i32,
}

impl Rect {
    pub fn new(x: i32, y: i32, w: i32, h: i32) -> Self {
        Rect { x, y, w, h }
    }
}

/// Column layout of a scene template; every template is constant down each column.
#[derive(Debug, Clone)]
pub struct Layout {
    pub width: u32,
    pub height: u32,
    columns: Vec<(u32, u32, [u8; 3])>,
    pub work_x0: i32,
    pub work_x1: i32,
    pub work_rgb: [u8; 3],
}

impl Layout {
    pub fn new(scene: Scene, width: u32, height: u32) -> Self {
        let w = width;
        let (columns, work) = match scene {
            Scene::Gai => (vec![(0, w / 5, [36, 40, 44]), (w / 5, w, [236, 236, 236])], 1),
            Scene::Web => (vec![(0, w * 3 / 4, [196, 200, 204]), (w * 3 / 4, w, [112, 120, 128])], 0),
            Scene::Docs => (
                vec![(0, w / 8, [146, 150, 154]), (w / 8, w * 7 / 8, [252, 252, 252]), (w * 7 / 8, w, [146, 150, 154])],
                1,
            ),
        };
        let (x0, x1, rgb) = columns[work];
        Layout { width, height, columns, work_x0: x0 as i32 + 8, work_x1: x1 as i32 - 8, work_rgb: rgb }
    }

    pub fn work_width(&self) -> i32 {
        self.work_x1 - self.work_x0
    }

    fn work_gray(&self) -> i32 {
        self.work_rgb.iter().map(|&c| c as i32).sum::<i32>() / 3
    }

    fn base_row(&self) -> Vec<u8> {
        let mut row = Vec::with_capacity(self.width as usize * 3);
        for x in 0..self.width {
            let rgb = self.columns.iter().find(|c| x >= c.0 && x < c.1).map(|c| c.2).unwrap_or([0; 3]);
            row.extend_from_slice(&rgb);
        }
        row
    }

    /// Cursor top-left bounds `(x0, y0, x1, y1)`, inclusive.
    fn cursor_bounds(&self) -> (i32, i32, i32, i32) {
        (self.work_x0, TOP_MARGIN as i32 + 4, self.work_x1 - GLYPH_W, self.height as i32 - 4 - GLYPH_H)
    }
}

/// A low-contrast line of body text, in content coordinates.
#[derive(Debug, Clone, Copy)]
pub struct TextLine {
    pub y: i32,
    pub h: i32,
    pub x0: i32,
    pub x1: i32,
}

pub fn text_lines(rng: &mut ChaCha8Rng, layout: &Layout, content_height: i32) -> Vec<TextLine> {
    let mut lines = Vec::new();
    let mut y = rng.random_range(2..8);
    let usable = layout.work_width() - 16;
    while y < content_height {
        let h = rng.random_range(3..=6);
        let x0 = layout.work_x0 + rng.random_range(0..=16);
        let len = (usable as f64 * rng.random_range(0.35..1.0)) as i32;
        lines.push(TextLine { y, h, x0, x1: (x0 + len).min(layout.work_x1) });
        y += h + rng.random_range(5..=12);
    }
    lines
}

/// Everything that varies between frames of one span.
#[derive(Debug, Clone, Default)]
pub struct Page {
    /// Pixels the body text has moved up.
    pub scroll: i32,
    pub tints: Vec<Rect>,
    pub marks: Vec<(Rect, [u8; 3])>,
    /// Top-left of the pointer glyph.
    pub cursor: Option<(i32, i32)>,
}

impl Page {
    pub fn cursor_centroid(&self) -> Option<(f64, f64)> {
        let (cx, cy) = glyph_centroid();
        self.cursor.map(|(x, y)| (x as f64 + cx, y as f64 + cy))
    }
}

pub fn render(layout: &Layout, lines: &[TextLine], page: &Page) -> Vec<u8> {
    let (w, h) = (layout.width as i32, layout.height as i32);
    let base = layout.base_row();
    let mut px = Vec::with_capacity(base.len() * h as usize);
    for _ in 0..h {
        px.extend_from_slice(&base);
    }
    let put = |px: &mut Vec<u8>, x: i32, y: i32, rgb: [u8; 3]| {
        if x >= 0 && y >= 0 && x < w && y < h {
            let i = (y * w + x) as usize * 3;
            px[i..i + 3].copy_from_slice(&rgb);
        }
    };
    let text_rgb = layout.work_rgb.map(|c| c.saturating_sub(TEXT_DROP));
    let top = TOP_MARGIN as i32;
    for line in lines {
        for cy in line.y..line.y + line.h {
            let sy = cy - page.scroll + top;
            if sy < top || sy >= h {
                continue;
            }
            for x in line.x0..line.x1 {
                put(&mut px, x, sy, text_rgb);
            }
        }
    }
    for t in &page.tints {
        for y in t.y.max(0)..(t.y + t.h).min(h) {
            for x in t.x.max(0)..(t.x + t.w).min(w) {
                let i = (y * w + x) as usize * 3;
                for c in 0..3 {
                    px[i + c] = px[i + c].saturating_sub(TINT[c]);
                }
            }
        }
    }
    for (r, rgb) in &page.marks {
        for y in r.y..r.y + r.h {
            for x in r.x..r.x + r.w {
                put(&mut px, x, y, *rgb);
            }
        }
    }
    if let Some((x0, y0)) = page.cursor {
        for (r, dx, gw) in glyph_rows() {
            for x in x0 + dx..x0 + dx + gw {
                put(&mut px, x, y0 + r, CURSOR_RGB);
            }
        }
    }
    px
}

fn outline(r: Rect, t: i32, rgb: [u8; 3]) -> Vec<(Rect, [u8; 3])> {
    vec![
        (Rect::new(r.x, r.y, r.w, t), rgb),
        (Rect::new(r.x, r.y + r.h - t, r.w, t), rgb),
        (Rect::new(r.x, r.y, t, r.h), rgb),
        (Rect::new(r.x + r.w - t, r.y, t, r.h), rgb),
    ]
}

/// Appends words left to right, wrapping at the region's right edge.
struct TextFlow {
    region: Rect,
    x: i32,
    y: i32,
}

impl TextFlow {
    fn new(region: Rect) -> Self {
        TextFlow { region, x: region.x, y: region.y }
    }

    fn next_word(&mut self, rng: &mut ChaCha8Rng) -> Option<Rect> {
        let w = rng.random_range(24..=44).min(self.region.w);
        if self.x + w > self.region.x + self.region.w {
            self.x = self.region.x;
            self.y += LINE_STEP;
        }
        if self.y + WORD_H > self.region.y + self.region.h {
            return None;
        }
        let r = Rect::new(self.x, self.y, w, WORD_H);
        self.x += w + 6;
        Some(r)
    }

    /// Types words until their summed intensity change reaches the per-pair target.
    fn burst(&mut self, rng: &mut ChaCha8Rng, layout: &Layout, page: &mut Page) -> bool {
        let target = TYPING_TARGET * 255.0 * layout.width as f64 * layout.height as f64;
        let per_px = (layout.work_gray() - TEXT_DROP as i32 - gray(WORD_RGB)).max(1) as f64;
        let mut sum = 0.0;
        let mut typed = false;
        while sum < target {
            let Some(r) = self.next_word(rng) else { break };
            sum += (r.w * r.h) as f64 * per_px;
            page.marks.push((r, WORD_RGB));
            typed = true;
        }
        typed
    }
}

fn gray(rgb: [u8; 3]) -> i32 {
    rgb.iter().map(|&c| c as i32).sum::<i32>() / 3
}

/// Frames of one span: the static body text and one page state per frame.
pub struct SpanScript {
    pub lines: Vec<TextLine>,
    pub pages: Vec<Page>,
}

fn random_cursor(rng: &mut ChaCha8Rng, layout: &Layout) -> (i32, i32) {
    let (x0, y0, x1, y1) = layout.cursor_bounds();
    (rng.random_range(x0..=x1.max(x0)), rng.random_range(y0..=y1.max(y0)))
}

/// Picks `k` distinct pair indices from `1..n`, sorted.
fn pick_pairs(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (1..n).collect();
    for i in (1..all.len()).rev() {
        let j = rng.random_range(0..=i);
        all.swap(i, j);
    }
    all.truncate(k.min(all.len()));
    all.sort_unstable();
    all
}

/// Renders the page states for `n` frames of `action` in `scene`.
pub fn behave(rng: &mut ChaCha8Rng, layout: &Layout, action: Action, n: usize) -> SpanScript {
    let h = layout.height as i32;
    match action {
        Action::ReadingWithScrolling => scrolling(rng, layout, n),
        _ => {
            let lines = text_lines(rng, layout, h);
            let mut page = Page { cursor: Some(random_cursor(rng, layout)), ..Page::default() };
            let pages = match action {
                Action::Freezing => vec![page; n],
                Action::ReadingWithHighlighting => highlighting(rng, layout, &lines, page, n),
                Action::CopyAndPaste => copy_paste(rng, layout, page, n),
                Action::SearchingInternet => searching(rng, layout, page, n),
                Action::GroupDocumentCoEditing => {
                    let region = Rect::new(layout.work_x0, TOP_MARGIN as i32 + 8, layout.work_width(), h - TOP_MARGIN as i32 - 16);
                    let mut flow = TextFlow::new(region);
                    let k = ((n.saturating_sub(1)) * 4 / 5).max(3);
                    let typing = pick_pairs(rng, n, k);
                    let mut pages = vec![page.clone()];
                    for i in 1..n {
                        if typing.binary_search(&i).is_ok() {
                            flow.burst(rng, layout, &mut page);
                        }
                        pages.push(page.clone());
                    }
                    pages
                }
                Action::TickingAnswers => ticking(rng, layout, page, n),
                Action::PromptingGai => prompting(rng, layout, page, n),
                Action::ReadingWithScrolling => unreachable!(),
            };
            SpanScript { lines, pages }
        }
    }
}

fn scrolling(rng: &mut ChaCha8Rng, layout: &Layout, n: usize) -> SpanScript {
    let h = layout.height as i32;
    let lines = text_lines(rng, layout, h + 40 * n as i32);
    let (x0, _, x1, _) = layout.cursor_bounds();
    // keep the pointer clear of rows lost to compensation at either edge
    let y_lo = TOP_MARGIN as i32 + 44;
    let y_hi = (h - GLYPH_H - 44).max(y_lo);
    let cursor = (rng.random_range(x0..=x1.max(x0)), rng.random_range(y_lo..=y_hi));
    let mut events: Vec<usize> = (1..n).filter(|_| rng.random_bool(0.75)).collect();
    if events.len() < 6.min(n.saturating_sub(1)) {
        events = (1..n).take(6).collect();
    }
    let mut page = Page { cursor: Some(cursor), ..Page::default() };
    let mut pages = vec![page.clone()];
    for i in 1..n {
        if events.contains(&i) {
            page.scroll += rng.random_range(20..=36);
        }
        pages.push(page.clone());
    }
    SpanScript { lines, pages }
}

fn highlighting(rng: &mut ChaCha8Rng, layout: &Layout, lines: &[TextLine], mut page: Page, n: usize) -> Vec<Page> {
    let (bx0, by0, bx1, by1) = layout.cursor_bounds();
    let top = TOP_MARGIN as i32;
    let candidates: Vec<&TextLine> = lines.iter().filter(|l| l.y + top - 4 >= by0 && l.y + top - 4 <= by1).collect();
    let y = match candidates.as_slice() {
        [] => rng.random_range(by0..=by1),
        c => c[rng.random_range(0..c.len())].y + top - 4,
    };
    let room = (bx1 - bx0).max(0);
    let moves = ((room - 8) / 15).clamp(2, 13) as usize;
    let pairs = pick_pairs(rng, n, moves);
    let mut x = bx0 + rng.random_range(0..=8.min(room));
    let start = x;
    page.cursor = Some((x, y));
    let mut pages = vec![page.clone()];
    for i in 1..n {
        if pairs.binary_search(&i).is_ok() {
            x = (x + rng.random_range(12..=15)).min(bx1);
            page.cursor = Some((x, y));
            page.tints = vec![Rect::new(start, y + 2, x - start + 6, 8)];
        }
        pages.push(page.clone());
    }
    pages
}

fn copy_paste(rng: &mut ChaCha8Rng, layout: &Layout, mut page: Page, n: usize) -> Vec<Page> {
    let (bx0, by0, bx1, by1) = layout.cursor_bounds();
    let (mut x, mut y) = (bx0 + rng.random_range(0..=8), rng.random_range(by0..=by1));
    page.cursor = Some((x, y));
    let mut pages = vec![page.clone()];
    let push = |page: &Page, pages: &mut Vec<Page>| {
        if pages.len() < n {
            pages.push(page.clone());
        }
    };
    while pages.len() < n {
        let drag = rng.random_range(3..=5);
        let start = x;
        for _ in 0..drag {
            x = (x + rng.random_range(12..=15)).min(bx1);
            page.cursor = Some((x, y));
            page.tints = vec![Rect::new(start, y + 2, x - start + 6, 8)];
            push(&page, &mut pages);
        }
        // jump well away vertically and back to the left
        let far: Vec<i32> = (by0..=by1).filter(|&c| (c - y).abs() >= 60).collect();
        if !far.is_empty() {
            y = far[rng.random_range(0..far.len())];
        }
        x = if x - bx0 >= 40 { rng.random_range(bx0..=x - 40) } else { bx0 };
        page.cursor = Some((x, y));
        page.tints.clear();
        push(&page, &mut pages);
        let mut flow = TextFlow::new(Rect::new(x + GLYPH_W + 8, y + 4, (layout.work_x1 - x - GLYPH_W - 8).max(0), WORD_H));
        for _ in 0..rng.random_range(2..=3) {
            if let Some(r) = flow.next_word(rng) {
                page.marks.push((r, WORD_RGB));
            }
        }
        push(&page, &mut pages);
        push(&page, &mut pages);
    }
    pages
}

fn searching(rng: &mut ChaCha8Rng, layout: &Layout, mut page: Page, n: usize) -> Vec<Page> {
    let top = TOP_MARGIN as i32;
    let bar = Rect::new(layout.work_x0 + 4, top + 6, layout.work_width() - 8, 24);
    page.marks.extend(outline(bar, 2, [90, 90, 90]));
    page.cursor = Some((bar.x + bar.w / 2, bar.y + bar.h + 6));
    let mut flow = TextFlow::new(Rect::new(bar.x + 6, bar.y + 7, bar.w - 12, WORD_H));
    let mut pages = vec![page.clone()];
    let mut links = Vec::new();
    let (bx0, _, bx1, by1) = layout.cursor_bounds();
    for i in 1..n {
        match i {
            1 | 2 => {
                flow.burst(rng, layout, &mut page);
            }
            3 => {
                for k in 0..5 {
                    let y = bar.y + bar.h + 14 + k * 18;
                    if y + 6 > layout.height as i32 - 4 {
                        break;
                    }
                    let w = rng.random_range(80..=(layout.work_width() - 20).clamp(81, 180));
                    links.push(page.marks.len());
                    page.marks.push((Rect::new(bar.x + 4, y, w, 6), LINK_RGB));
                }
            }
            _ if !links.is_empty() && rng.random_bool(0.5) => {
                let k = links[rng.random_range(0..links.len())];
                let r = page.marks[k].0;
                page.marks[k].1 = VISITED_RGB;
                page.cursor = Some(((r.x + rng.random_range(0..r.w)).clamp(bx0, bx1), (r.y + 4).min(by1)));
            }
            _ => {}
        }
        pages.push(page.clone());
    }
    pages
}

fn ticking(rng: &mut ChaCha8Rng, layout: &Layout, mut page: Page, n: usize) -> Vec<Page> {
    let top = TOP_MARGIN as i32;
    let boxes: Vec<Rect> = (0..)
        .map(|i| Rect::new(layout.work_x0 + 6, top + 10 + 40 * i, 24, 24))
        .take_while(|b| b.y + b.h + GLYPH_H <= layout.height as i32 - 4)
        .collect();
    for b in &boxes {
        page.marks.extend(outline(*b, 2, BOX_RGB));
    }
    let ticks = pick_pairs(rng, n, boxes.len().min(n.saturating_sub(1)).min(5).max(1));
    let mut pages = vec![page.clone()];
    let mut next = 0;
    for i in 1..n {
        if ticks.binary_search(&i).is_ok() && next < boxes.len() {
            let b = boxes[next];
            next += 1;
            page.marks.push((Rect::new(b.x + 2, b.y + 2, 20, 20), WORD_RGB));
            page.marks.push((Rect::new(b.x + 34, b.y + 8, 30, WORD_H), WORD_RGB));
            page.cursor = Some((b.x + 16, b.y + 14));
        }
        pages.push(page.clone());
    }
    pages
}

fn prompting(rng: &mut ChaCha8Rng, layout: &Layout, mut page: Page, n: usize) -> Vec<Page> {
    let h = layout.height as i32;
    let top = TOP_MARGIN as i32;
    let prompt = Rect::new(layout.work_x0 + 4, h - 42, layout.work_width() - 8, 36);
    page.marks.extend(outline(prompt, 2, [120, 120, 120]));
    page.cursor = Some((prompt.x + prompt.w - GLYPH_W - 8, prompt.y - GLYPH_H - 4));
    let mut input = TextFlow::new(Rect::new(prompt.x + 6, prompt.y + 6, prompt.w - 12, 2 * LINE_STEP));
    let mut chat = TextFlow::new(Rect::new(layout.work_x0 + 4, top + 8, layout.work_width() - 8, prompt.y - top - 20));
    let typing = rng.random_range(2..=3);
    let mut pages = vec![page.clone()];
    for i in 1..n {
        if i <= typing {
            if !input.burst(rng, layout, &mut page) {
                chat.burst(rng, layout, &mut page);
            }
        } else if rng.random_bool(0.7) {
            chat.burst(rng, layout, &mut page);
        }
        pages.push(page.clone());
    }
    pages
}
