//! Frame loading and fixed-window segmentation into evaluation units.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use crate::record::EvaluationUnit;

/// A row-major 8-bit RGB raster with its position in the sampled sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub index: usize,
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
    timestamp_ms: u64,
}

impl Frame {
    pub fn new(index: usize, timestamp_s: f64, width: u32, height: u32, pixels: Vec<u8>) -> Self {
        assert_eq!(
            pixels.len(),
            width as usize * height as usize * 3,
            "pixel buffer does not match {width}x{height} RGB"
        );
        Frame { index, width, height, pixels, timestamp_ms: (timestamp_s * 1000.0).round() as u64 }
    }

    /// A frame filled with one colour.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let pixels = rgb.iter().copied().cycle().take(width as usize * height as usize * 3).collect();
        Frame::new(0, 0.0, width, height, pixels)
    }

    pub fn timestamp_s(&self) -> f64 {
        self.timestamp_ms as f64 / 1000.0
    }

    pub fn with_position(mut self, index: usize, timestamp_s: f64) -> Self {
        self.index = index;
        self.timestamp_ms = (timestamp_s * 1000.0).round() as u64;
        self
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Unweighted channel mean, rounded down.
    pub fn gray(&self) -> Vec<u8> {
        self.pixels
            .chunks_exact(3)
            .map(|p| ((p[0] as u16 + p[1] as u16 + p[2] as u16) / 3) as u8)
            .collect()
    }

    pub fn same_size(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let encoder = image::codecs::png::PngEncoder::new(&mut out);
        image::ImageEncoder::write_image(
            encoder,
            &self.pixels,
            self.width,
            self.height,
            image::ExtendedColorType::Rgb8,
        )
        .expect("encoding an in-memory RGB buffer cannot fail");
        out
    }

    pub fn save_png(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.to_png())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("source not found: {0}")]
    Missing(PathBuf),
    #[error("no frames found in {0}")]
    Empty(PathBuf),
    #[error("cannot read frame {path}: {message}")]
    Unreadable { path: PathBuf, message: String },
    #[error("frame {path} is {found_w}x{found_h}, expected {want_w}x{want_h}")]
    MixedDimensions { path: PathBuf, found_w: u32, found_h: u32, want_w: u32, want_h: u32 },
    #[error("fps must be positive, got {0}")]
    BadFps(f64),
    #[error("window must be positive, got {0} s")]
    BadWindow(f64),
    #[error("{0} is a file but no decoder command is configured")]
    NoDecoder(PathBuf),
    #[error("decoder failed: {0}")]
    Decoder(String),
}

/// Ordered frames sampled at a declared rate. All frames share one size.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    /// Video identifier; prefixes unit ids.
    pub name: String,
    pub fps: f64,
    frames: Vec<Frame>,
}

impl FrameSequence {
    /// Re-indexes frames by position and stamps timestamps `index / fps`.
    pub fn new(name: impl Into<String>, fps: f64, frames: Vec<Frame>) -> Result<Self, IngestError> {
        if !(fps > 0.0) || !fps.is_finite() {
            return Err(IngestError::BadFps(fps));
        }
        let frames: Vec<Frame> = frames
            .into_iter()
            .enumerate()
            .map(|(i, f)| f.with_position(i, i as f64 / fps))
            .collect();
        if let Some(first) = frames.first() {
            if let Some(bad) = frames.iter().find(|f| !f.same_size(first)) {
                return Err(IngestError::MixedDimensions {
                    path: PathBuf::from(format!("#{}", bad.index)),
                    found_w: bad.width,
                    found_h: bad.height,
                    want_w: first.width,
                    want_h: first.height,
                });
            }
        }
        Ok(FrameSequence { name: name.into(), fps, frames })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Frame> {
        self.frames.get(index)
    }

    pub fn dimensions(&self) -> Option<(u32, u32)> {
        self.frames.first().map(|f| (f.width, f.height))
    }

    /// The contiguous sub-sequence `[start, end]` (inclusive), keeping original indices.
    pub fn slice(&self, start: usize, end: usize) -> &[Frame] {
        &self.frames[start..=end.min(self.frames.len() - 1)]
    }
}

fn png_files(dir: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let entries = fs::read_dir(dir).map_err(|e| IngestError::Unreadable {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("png"))
        })
        .collect();
    files.sort();
    Ok(files)
}

pub fn read_png(path: &Path) -> Result<(u32, u32, Vec<u8>), IngestError> {
    let img = image::open(path).map_err(|e| IngestError::Unreadable {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let rgb = img.into_rgb8();
    let (w, h) = rgb.dimensions();
    Ok((w, h, rgb.into_raw()))
}

/// Loads a directory of lexicographically ordered PNG frames.
pub fn load_frame_dir(dir: &Path, fps: f64) -> Result<FrameSequence, IngestError> {
    if !(fps > 0.0) || !fps.is_finite() {
        return Err(IngestError::BadFps(fps));
    }
    if !dir.exists() {
        return Err(IngestError::Missing(dir.to_path_buf()));
    }
    let files = png_files(dir)?;
    if files.is_empty() {
        return Err(IngestError::Empty(dir.to_path_buf()));
    }
    let mut frames = Vec::with_capacity(files.len());
    let mut size = None;
    for (i, path) in files.iter().enumerate() {
        let (w, h, pixels) = read_png(path)?;
        match size {
            None => size = Some((w, h)),
            Some((want_w, want_h)) if (w, h) != (want_w, want_h) => {
                return Err(IngestError::MixedDimensions {
                    path: path.clone(),
                    found_w: w,
                    found_h: h,
                    want_w,
                    want_h,
                })
            }
            Some(_) => {}
        }
        frames.push(Frame::new(i, i as f64 / fps, w, h, pixels));
    }
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    FrameSequence::new(name, fps, frames)
}

/// External video decoder invoked as a subprocess.
///
/// The template is split on whitespace; `{input}`, `{output}` and `{fps}` are
/// substituted in each argument. The command must write PNG frames into
/// `{output}`, e.g. `ffmpeg -loglevel error -i {input} -vf fps={fps} {output}/f_%06d.png`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderCommand {
    pub template: String,
}

impl DecoderCommand {
    pub fn new(template: impl Into<String>) -> Self {
        DecoderCommand { template: template.into() }
    }

    pub fn argv(&self, input: &Path, output: &Path, fps: f64) -> Vec<String> {
        self.template
            .split_whitespace()
            .map(|arg| {
                arg.replace("{input}", &input.to_string_lossy())
                    .replace("{output}", &output.to_string_lossy())
                    .replace("{fps}", &fps.to_string())
            })
            .collect()
    }

    pub fn decode(&self, input: &Path, fps: f64) -> Result<FrameSequence, IngestError> {
        let out = tempfile::tempdir().map_err(|e| IngestError::Decoder(e.to_string()))?;
        let argv = self.argv(input, out.path(), fps);
        let (program, args) = argv.split_first().ok_or_else(|| IngestError::Decoder("empty command".into()))?;
        let status = Command::new(program)
            .args(args)
            .output()
            .map_err(|e| IngestError::Decoder(format!("{program}: {e}")))?;
        if !status.status.success() {
            return Err(IngestError::Decoder(format!(
                "{program} exited with {}: {}",
                status.status,
                String::from_utf8_lossy(&status.stderr).trim()
            )));
        }
        let mut seq = load_frame_dir(out.path(), fps)?;
        seq.name = input.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(seq)
    }
}

/// Loads frames from a PNG directory or, with a decoder, from a video file.
pub fn load_frame_sequence(
    source: &Path,
    fps: f64,
    decoder: Option<&DecoderCommand>,
) -> Result<FrameSequence, IngestError> {
    if !source.exists() {
        return Err(IngestError::Missing(source.to_path_buf()));
    }
    if source.is_dir() {
        return load_frame_dir(source, fps);
    }
    match decoder {
        Some(d) => d.decode(source, fps),
        None => Err(IngestError::NoDecoder(source.to_path_buf())),
    }
}

/// Splits a sequence into consecutive non-overlapping windows of `window_s`.
///
/// A trailing partial window is kept when it spans at least half a window,
/// otherwise its frames join the previous unit.
pub fn segment_fixed(seq: &FrameSequence, window_s: f64) -> Result<Vec<EvaluationUnit>, IngestError> {
    if !(window_s > 0.0) || !window_s.is_finite() {
        return Err(IngestError::BadWindow(window_s));
    }
    if seq.is_empty() {
        return Err(IngestError::Empty(PathBuf::from(&seq.name)));
    }
    let bounds = window_bounds(seq.len(), window_s, seq.fps);
    let prefix = if seq.name.is_empty() { String::new() } else { format!("{}/", seq.name) };
    Ok(bounds
        .into_iter()
        .enumerate()
        .map(|(k, (start, end))| EvaluationUnit {
            unit_id: format!("{prefix}u{k:02}"),
            start_s: seq.frames[start].timestamp_s(),
            duration_s: (end - start) as f64 / seq.fps,
            frame_indices: (start..end).collect(),
        })
        .collect())
}

/// Half-open `[start, end)` frame ranges produced by the window/tail rule.
pub fn window_bounds(n_frames: usize, window_s: f64, fps: f64) -> Vec<(usize, usize)> {
    let w = ((window_s * fps).round() as usize).max(1);
    let mut bounds: Vec<(usize, usize)> =
        (0..n_frames).step_by(w).map(|s| (s, (s + w).min(n_frames))).collect();
    if bounds.len() > 1 {
        let (s, e) = *bounds.last().unwrap();
        if 2 * (e - s) < w {
            bounds.pop();
            bounds.last_mut().unwrap().1 = e;
        }
    }
    bounds
}
