//! Seeded synthetic screen recordings with gold labels and scripted replies.
//!
//! Every output is a pure function of the [`CorpusSpec`]. Scenes are drawn
//! as column-structured background templates, the pointer as a dark 12×18
//! glyph, scrolling as vertical translation of low-contrast body text and
//! typing as small dark word rectangles.

pub mod fixtures;
mod render;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::ingest::{window_bounds, Frame, FrameSequence};
use crate::labels::{render_labels, LabelFormat};
use crate::record::LabelRecord;
use crate::tags;
use crate::taxonomy::{compatible_scenes, is_compatible, Action, Scene};
use crate::vlm::{MockScript, StructuredLabel};

pub use render::{glyph_centroid, Layout, GLYPH_H, GLYPH_W};

/// Confidence the cooperative script attaches to unit-level labels.
pub const LABEL_CONFIDENCE: f64 = 0.9;
/// Confidence of segment-level behavior replies; below the validation override.
pub const SEGMENT_CONFIDENCE: f64 = 0.8;
/// Reply for prompts without a matching fixture tag.
pub const DEFAULT_REPLY: &str = "No scripted reply for this request.";

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("{action} cannot occur in scene {scene}")]
    Incompatible { action: Action, scene: Scene },
    #[error("span {index} of video {video} has no frames")]
    ZeroDuration { video: String, index: usize },
    #[error("video {video}: spans last {total} s but video_length_s is {expected}")]
    TimelineLength { video: String, total: f64, expected: f64 },
    #[error("invalid corpus spec: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("spec file {path}: {message}")]
    SpecFile { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io { path: path.to_path_buf(), source }
}

/// One scene span of a timeline. A missing action is drawn at random from the compatible ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanSpec {
    pub scene: Scene,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Action>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub spans: Vec<SpanSpec>,
}

/// Description of a synthetic corpus.
///
/// With `videos` empty, `n_videos` timelines of `video_length_s` are drawn at
/// random: spans one window long, each with a scene different from its
/// predecessor and a random compatible action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub seed: u64,
    pub n_videos: usize,
    pub video_length_s: f64,
    pub fps: f64,
    pub window_s: f64,
    pub frame_width: u32,
    pub frame_height: u32,
    /// Write the scripted-reply file keyed by fixture tags.
    pub fixture_tagging: bool,
    /// Share of units whose scripted replies gain a scene-incompatible action.
    pub inject_incompatible: f64,
    pub videos: Vec<VideoSpec>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            seed: 0,
            n_videos: 1,
            video_length_s: 60.0,
            fps: 1.0,
            window_s: 20.0,
            frame_width: 320,
            frame_height: 256,
            fixture_tagging: true,
            inject_incompatible: 0.0,
            videos: Vec::new(),
        }
    }
}

impl CorpusSpec {
    pub fn load(path: &Path) -> Result<Self, SynthError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let spec = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        spec.map_err(|message| SynthError::SpecFile { path: path.to_path_buf(), message })
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Invalid(m.to_string()));
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return bad("fps must be positive");
        }
        if !(self.window_s > 0.0 && self.window_s.is_finite()) {
            return bad("window_s must be positive");
        }
        if self.frame_width < 200 || self.frame_height < 160 {
            return bad("frames must be at least 200x160");
        }
        if !(0.0..=1.0).contains(&self.inject_incompatible) {
            return bad("inject_incompatible must be in [0, 1]");
        }
        if self.videos.is_empty() && self.n_videos == 0 {
            return bad("n_videos must be at least 1");
        }
        if !(self.video_length_s > 0.0 && self.video_length_s.is_finite()) {
            return bad("video_length_s must be positive");
        }
        for (i, v) in self.videos.iter().enumerate() {
            let name = video_name(i, v);
            if v.spans.is_empty() {
                return Err(SynthError::Invalid(format!("video {name} has no spans")));
            }
            for (k, s) in v.spans.iter().enumerate() {
                if !(s.duration_s > 0.0) {
                    return Err(SynthError::ZeroDuration { video: name, index: k });
                }
                if let Some(a) = s.action {
                    if !is_compatible(a, s.scene) {
                        return Err(SynthError::Incompatible { action: a, scene: s.scene });
                    }
                }
            }
            let total: f64 = v.spans.iter().map(|s| s.duration_s).sum();
            if (total - self.video_length_s).abs() > 1e-9 {
                return Err(SynthError::TimelineLength { video: name, total, expected: self.video_length_s });
            }
        }
        Ok(())
    }

    fn video_count(&self) -> usize {
        if self.videos.is_empty() {
            self.n_videos
        } else {
            self.videos.len()
        }
    }
}

fn video_name(i: usize, v: &VideoSpec) -> String {
    v.name.clone().unwrap_or_else(|| format!("v{i:03}"))
}

/// A span as rendered: inclusive frame range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanTruth {
    pub scene: Scene,
    pub action: Action,
    pub start_frame: usize,
    pub end_frame: usize,
}

/// Maximal run of equal-scene spans, the segmentation a perfect scene detector yields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentTruth {
    pub scene: Scene,
    pub start_frame: usize,
    pub end_frame: usize,
    pub actions: BTreeSet<Action>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoTruth {
    pub name: String,
    pub n_frames: usize,
    pub spans: Vec<SpanTruth>,
    /// First frame plus every frame whose scene differs from the previous one.
    pub scene_changes: Vec<usize>,
    /// True pointer centroid per frame.
    pub cursor: Vec<Option<(f64, f64)>>,
    /// Pixels the body text moved up since the previous frame.
    pub scroll: Vec<i32>,
}

impl VideoTruth {
    pub fn segments(&self) -> Vec<SegmentTruth> {
        let mut out: Vec<SegmentTruth> = Vec::new();
        for s in &self.spans {
            match out.last_mut() {
                Some(last) if last.scene == s.scene => {
                    last.end_frame = s.end_frame;
                    last.actions.insert(s.action);
                }
                _ => out.push(SegmentTruth {
                    scene: s.scene,
                    start_frame: s.start_frame,
                    end_frame: s.end_frame,
                    actions: [s.action].into(),
                }),
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticVideo {
    pub truth: VideoTruth,
    pub fps: f64,
    pub frames: Vec<Frame>,
}

impl SyntheticVideo {
    pub fn sequence(&self) -> FrameSequence {
        FrameSequence::new(self.truth.name.clone(), self.fps, self.frames.clone()).expect("generated frames are uniform")
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub spec: CorpusSpec,
    pub videos: Vec<SyntheticVideo>,
    pub gold: Vec<LabelRecord>,
    /// Units whose scripted replies carry an extra incompatible action.
    pub injected: BTreeSet<String>,
}

fn random_timeline(rng: &mut ChaCha8Rng, spec: &CorpusSpec) -> Vec<SpanSpec> {
    let mut spans = Vec::new();
    let mut left = spec.video_length_s;
    let mut prev: Option<Scene> = None;
    while left > 1e-9 {
        let d = spec.window_s.min(left);
        let choices: Vec<Scene> = Scene::ALL.into_iter().filter(|s| Some(*s) != prev).collect();
        let scene = choices[rng.random_range(0..choices.len())];
        spans.push(SpanSpec { scene, duration_s: d, action: None });
        prev = Some(scene);
        left -= d;
    }
    spans
}

fn random_action(rng: &mut ChaCha8Rng, scene: Scene) -> Action {
    let options: Vec<Action> = Action::ALL.into_iter().filter(|a| compatible_scenes(*a).contains(&scene)).collect();
    options[rng.random_range(0..options.len())]
}

/// Renders one video; `index` selects the random stream.
fn generate_video(spec: &CorpusSpec, index: usize) -> Result<SyntheticVideo, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let (name, spans) = match spec.videos.get(index) {
        Some(v) => (video_name(index, v), v.spans.clone()),
        None => (format!("v{index:03}"), random_timeline(&mut rng, spec)),
    };
    let (w, h) = (spec.frame_width, spec.frame_height);
    let mut frames = Vec::new();
    let mut truth = VideoTruth {
        name: name.clone(),
        n_frames: 0,
        spans: Vec::new(),
        scene_changes: Vec::new(),
        cursor: Vec::new(),
        scroll: Vec::new(),
    };
    let mut elapsed = 0.0;
    for (k, span) in spans.iter().enumerate() {
        let start = (elapsed * spec.fps).round() as usize;
        elapsed += span.duration_s;
        let end = (elapsed * spec.fps).round() as usize;
        if end <= start {
            return Err(SynthError::ZeroDuration { video: name, index: k });
        }
        let action = span.action.unwrap_or_else(|| random_action(&mut rng, span.scene));
        if !is_compatible(action, span.scene) {
            return Err(SynthError::Incompatible { action, scene: span.scene });
        }
        let layout = Layout::new(span.scene, w, h);
        let script = render::behave(&mut rng, &layout, action, end - start);
        if truth.spans.last().is_none_or(|p: &SpanTruth| p.scene != span.scene) {
            truth.scene_changes.push(start);
        }
        let mut prev_scroll = None;
        for page in &script.pages {
            let i = frames.len();
            let pixels = render::render(&layout, &script.lines, page);
            frames.push(Frame::new(i, i as f64 / spec.fps, w, h, pixels));
            truth.cursor.push(page.cursor_centroid());
            truth.scroll.push(prev_scroll.map_or(0, |p| page.scroll - p));
            prev_scroll = Some(page.scroll);
        }
        truth.spans.push(SpanTruth { scene: span.scene, action, start_frame: start, end_frame: end - 1 });
    }
    truth.n_frames = frames.len();
    Ok(SyntheticVideo { truth, fps: spec.fps, frames })
}

/// Gold record of each window: union of the scenes and actions of the spans it overlaps.
fn gold_records(truth: &VideoTruth, window_s: f64, fps: f64) -> Vec<LabelRecord> {
    window_bounds(truth.n_frames, window_s, fps)
        .into_iter()
        .enumerate()
        .map(|(k, (start, end))| {
            let over = truth.spans.iter().filter(|s| s.start_frame <= end - 1 && start <= s.end_frame);
            let (scenes, actions): (Vec<Scene>, Vec<Action>) = over.map(|s| (s.scene, s.action)).unzip();
            LabelRecord::with_labels(format!("{}/u{k:02}", truth.name), scenes, actions)
        })
        .collect()
}

pub fn generate_corpus(spec: &CorpusSpec) -> Result<Corpus, SynthError> {
    spec.validate()?;
    let videos = (0..spec.video_count())
        .into_par_iter()
        .map(|i| generate_video(spec, i))
        .collect::<Result<Vec<_>, _>>()?;
    let gold: Vec<LabelRecord> = videos.iter().flat_map(|v| gold_records(&v.truth, spec.window_s, spec.fps)).collect();
    let mut ids: Vec<String> = gold.iter().map(|r| r.unit_id.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(u64::MAX);
    ids.shuffle(&mut rng);
    let k = (spec.inject_incompatible * ids.len() as f64).round() as usize;
    let injected = ids.into_iter().take(k).collect();
    Ok(Corpus { spec: spec.clone(), videos, gold, injected })
}

/// An action none of whose compatible scenes are in `scenes`, if one exists.
fn incompatible_with(scenes: &BTreeSet<Scene>) -> Option<Action> {
    Action::ALL.into_iter().find(|a| compatible_scenes(*a).is_disjoint(scenes))
}

fn label_reply(scenes: &BTreeSet<Scene>, actions: &BTreeSet<Action>, confidence: f64, inject: bool) -> StructuredLabel {
    let mut label = StructuredLabel { scenes: scenes.clone(), actions: actions.clone(), ..Default::default() };
    if inject {
        if let Some(extra) = incompatible_with(scenes) {
            label.actions.insert(extra);
        }
    }
    for &a in &label.actions {
        let c = if actions.contains(&a) { confidence } else { LABEL_CONFIDENCE };
        label.confidences.insert(a, c);
        label.evidence.insert(a, format!("on-screen evidence of {}", a.display_name().to_lowercase()));
    }
    label
}

fn step_reply(thought: &str, action: &str, input: serde_json::Value) -> String {
    json!({"thought": thought, "action": action, "action_input": input}).to_string()
}

impl Corpus {
    pub fn video(&self, name: &str) -> Option<&SyntheticVideo> {
        self.videos.iter().find(|v| v.truth.name == name)
    }

    /// Cooperative replies for every strategy: gold labels for each unit,
    /// the true scene for every frame, and segment behaviors.
    pub fn mock_script(&self) -> MockScript {
        let mut script = MockScript::new(DEFAULT_REPLY);
        for g in &self.gold {
            let inject = self.injected.contains(&g.unit_id);
            let reply = label_reply(&g.scenes, &g.actions, LABEL_CONFIDENCE, inject).to_reply_json();
            script.push(&tags::unit_key(&g.unit_id), reply.to_string());
            script.push(&tags::react_classify_key(&g.unit_id), reply.to_string());
            script.push(
                &tags::react_step_key(&g.unit_id, 1),
                step_reply("Check how the cursor moves in this unit.", "CursorProbe", json!("")),
            );
            script.push(
                &tags::react_step_key(&g.unit_id, 2),
                step_reply("Classify the unit with the cursor evidence in mind.", "ClassifyBehavior", json!("")),
            );
            script.push(
                &tags::react_step_key(&g.unit_id, 3),
                step_reply("The classification agrees with the observed evidence.", "Finish", reply),
            );
        }
        for v in &self.videos {
            let t = &v.truth;
            for s in &t.spans {
                let reply = json!({"scenes": [s.scene.as_str()], "actions": []}).to_string();
                for f in s.start_frame..=s.end_frame {
                    script.push(&tags::scene_key(&t.name, f), reply.clone());
                }
            }
            let units = window_bounds(t.n_frames, self.spec.window_s, self.spec.fps);
            for seg in t.segments() {
                let inject = units.iter().enumerate().any(|(k, &(a, b))| {
                    a <= seg.end_frame && seg.start_frame < b && self.injected.contains(&format!("{}/u{k:02}", t.name))
                });
                let scenes = [seg.scene].into();
                let reply = label_reply(&scenes, &seg.actions, SEGMENT_CONFIDENCE, inject).to_reply_json();
                script.push(&tags::segment_key(&t.name, seg.start_frame, seg.end_frame), reply.to_string());
            }
        }
        script
    }

    pub fn gold_tsv(&self) -> String {
        render_labels(&self.gold, LabelFormat::Tsv)
    }

    pub fn manifest_json(&self) -> String {
        let manifest = json!({
            "spec": self.spec,
            "videos": self.videos.iter().map(|v| &v.truth).collect::<Vec<_>>(),
            "injected_units": self.injected,
        });
        serde_json::to_string_pretty(&manifest).expect("manifest serializes")
    }

    /// Writes `videos/<name>/frame_NNNNN.png`, `gold.tsv`, `corpus.json` and,
    /// when tagging is on, `mock_script.tsv` under `out`.
    pub fn write(&self, out: &Path) -> Result<(), SynthError> {
        let videos_dir = out.join("videos");
        fs::create_dir_all(&videos_dir).map_err(io_err(&videos_dir))?;
        self.videos.par_iter().try_for_each(|v| {
            let dir = videos_dir.join(&v.truth.name);
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            v.frames.par_iter().try_for_each(|f| {
                let path = dir.join(format!("frame_{:05}.png", f.index));
                f.save_png(&path).map_err(io_err(&path))
            })
        })?;
        let write = |name: &str, text: String| {
            let path = out.join(name);
            fs::write(&path, text).map_err(io_err(&path))
        };
        write("gold.tsv", self.gold_tsv())?;
        write("corpus.json", self.manifest_json())?;
        if self.spec.fixture_tagging {
            write("mock_script.tsv", self.mock_script().render())?;
        }
        Ok(())
    }
}

/// SHA-256 over every file below `dir` (relative path and contents, sorted by path).
pub fn directory_digest(dir: &Path) -> std::io::Result<String> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(dir, &mut files)?;
    files.sort();
    let mut hasher = Sha256::new();
    for f in files {
        let rel = f.strip_prefix(dir).unwrap_or(&f);
        hasher.update(rel.to_string_lossy().as_bytes());
        hasher.update([0]);
        hasher.update(fs::read(&f)?);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vision::{detect_keyframes, frame_diff_score};

    fn two_span() -> CorpusSpec {
        CorpusSpec {
            video_length_s: 40.0,
            videos: vec![VideoSpec {
                name: Some("demo".into()),
                spans: vec![
                    SpanSpec { scene: Scene::Web, duration_s: 20.0, action: Some(Action::SearchingInternet) },
                    SpanSpec { scene: Scene::Docs, duration_s: 20.0, action: Some(Action::GroupDocumentCoEditing) },
                ],
            }],
            ..CorpusSpec::default()
        }
    }

    #[test]
    fn gold_restates_the_spec() {
        let c = generate_corpus(&two_span()).unwrap();
        assert_eq!(c.gold.len(), 2);
        assert_eq!(c.gold[0], LabelRecord::with_labels("demo/u00", [Scene::Web], [Action::SearchingInternet]));
        assert_eq!(c.gold[1], LabelRecord::with_labels("demo/u01", [Scene::Docs], [Action::GroupDocumentCoEditing]));
        assert_eq!(c.videos[0].frames.len(), 40);
        assert_eq!(c.videos[0].truth.scene_changes, vec![0, 20]);
    }

    #[test]
    fn incompatible_and_empty_spans_rejected() {
        let mut spec = two_span();
        spec.videos[0].spans[0].action = Some(Action::PromptingGai);
        assert!(matches!(generate_corpus(&spec), Err(SynthError::Incompatible { .. })));
        let mut spec = two_span();
        spec.videos[0].spans[1].duration_s = 0.0;
        assert!(matches!(generate_corpus(&spec), Err(SynthError::ZeroDuration { .. })));
    }

    #[test]
    fn freezing_frames_identical() {
        let spec = CorpusSpec {
            video_length_s: 20.0,
            videos: vec![VideoSpec {
                name: None,
                spans: vec![SpanSpec { scene: Scene::Gai, duration_s: 20.0, action: Some(Action::Freezing) }],
            }],
            ..CorpusSpec::default()
        };
        let c = generate_corpus(&spec).unwrap();
        let f = &c.videos[0].frames;
        assert!(f.windows(2).all(|w| w[0].pixels == w[1].pixels));
    }

    #[test]
    fn templates_are_far_apart() {
        for (i, a) in Scene::ALL.into_iter().enumerate() {
            for b in Scene::ALL.into_iter().skip(i + 1) {
                let fa = Frame::new(0, 0.0, 320, 256, render::render(&Layout::new(a, 320, 256), &[], &render::Page::default()));
                let fb = Frame::new(0, 0.0, 320, 256, render::render(&Layout::new(b, 320, 256), &[], &render::Page::default()));
                let d = frame_diff_score(&fa, &fb).unwrap().value();
                assert!(d > 0.15, "{a} vs {b}: {d}");
            }
        }
    }

    #[test]
    fn random_corpus_properties() {
        let spec = CorpusSpec { seed: 11, n_videos: 4, video_length_s: 60.0, ..CorpusSpec::default() };
        let c = generate_corpus(&spec).unwrap();
        assert_eq!(c.gold.len(), 12);
        for r in &c.gold {
            assert!(r.violations().is_empty(), "{r:?}");
            assert_eq!(r.scenes.len(), 1);
        }
        for v in &c.videos {
            assert_eq!(detect_keyframes(&v.frames, 0.12), v.truth.scene_changes, "{}", v.truth.name);
        }
    }

    #[test]
    fn injection_count() {
        let spec = CorpusSpec { seed: 3, n_videos: 10, inject_incompatible: 0.3, ..CorpusSpec::default() };
        let c = generate_corpus(&spec).unwrap();
        assert_eq!(c.injected.len(), 9);
        let script = c.mock_script();
        assert!(script.len() > 30);
    }
}
