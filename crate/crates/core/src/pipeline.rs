//! Batch runner: loads every video of a corpus, codes its units with the
//! configured strategy and writes predictions, traces and a run manifest.
//!
//! Output layout under the run directory:
//!
//! ```text
//! predictions.tsv            one record per unit, in video then unit order
//! candidates.tsv             workflow mode: records before validation
//! manifest.json              config, version, seed and per-unit status
//! traces/<video>/<unit>.json single and react modes
//! traces/<video>/workflow.json
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::few_shot_classify;
use crate::config::{Mode, RunConfig};
use crate::context::Context;
use crate::ingest::{load_frame_sequence, segment_fixed, DecoderCommand, FrameSequence, IngestError};
use crate::labels::{render_labels, LabelFormat};
use crate::prompts::{PromptError, PromptSet};
use crate::react::run_react;
use crate::record::{EvaluationUnit, LabelRecord};
use crate::vlm::{HttpVlm, MockVlm, RateLimiter, RetryPolicy, VisionLanguageModel, VlmError};
use crate::workflow::run_workflow;

const VIDEO_EXTENSIONS: [&str; 6] = ["mp4", "mkv", "webm", "mov", "avi", "m4v"];

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Prompts(#[from] PromptError),
    #[error(transparent)]
    Provider(#[from] VlmError),
    #[error("no videos found under {0}")]
    NoVideos(PathBuf),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::Io { path: path.to_path_buf(), message: e.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitState {
    Ok,
    Flagged,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitStatus {
    pub unit_id: String,
    pub status: UnitState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Results for one video, ready to be written.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoResult {
    pub name: String,
    pub n_frames: usize,
    pub records: Vec<LabelRecord>,
    /// Pre-validation records (workflow mode only).
    pub candidates: Option<Vec<LabelRecord>>,
    /// `(file name, JSON)` pairs for `traces/<video>/`.
    pub traces: Vec<(String, String)>,
    pub statuses: Vec<UnitStatus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoManifest {
    pub name: String,
    pub n_frames: usize,
    pub units: Vec<UnitStatus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub mode: Mode,
    pub seed: u64,
    pub input: String,
    pub config: RunConfig,
    pub units_total: usize,
    pub units_ok: usize,
    pub units_flagged: usize,
    pub units_failed: usize,
    pub videos: Vec<VideoManifest>,
}

/// The provider named by the config: the scripted mock when a script is
/// given, otherwise the HTTP client with credentials from the environment.
pub fn build_vlm(cfg: &RunConfig) -> Result<Box<dyn VisionLanguageModel>, VlmError> {
    if let Some(script) = &cfg.mock {
        return Ok(Box::new(MockVlm::load(script)?));
    }
    let endpoint = cfg.endpoint.as_deref().ok_or_else(|| VlmError::InvalidRequest("no endpoint configured".into()))?;
    let retry = RetryPolicy { max_retries: cfg.retries, timeout: Duration::from_secs(cfg.timeout_s), ..RetryPolicy::default() };
    let limiter = Arc::new(RateLimiter::new(cfg.rate_limit_rpm, 1));
    Ok(Box::new(HttpVlm::from_env(endpoint, &cfg.api_key_env, retry, limiter)?))
}

pub fn load_prompts(cfg: &RunConfig) -> Result<PromptSet, PromptError> {
    match &cfg.prompt_dir {
        Some(dir) => PromptSet::load(dir),
        None => Ok(PromptSet::builtin()),
    }
}

/// Video sources under `input`, sorted by name.
///
/// A synthetic corpus directory (with a `videos/` child) is read from that
/// child. Each sub-directory is a frame directory and each video file is
/// decoded; a directory holding PNG frames directly is a single video.
pub fn discover_videos(input: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    if !input.exists() {
        return Err(IngestError::Missing(input.to_path_buf()).into());
    }
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let root = if input.join("videos").is_dir() { input.join("videos") } else { input.to_path_buf() };
    let mut dirs = Vec::new();
    let mut has_png = false;
    for entry in fs::read_dir(&root).map_err(io_err(&root))? {
        let path = entry.map_err(io_err(&root))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_dir() {
            dirs.push(path);
        } else if ext.as_deref() == Some("png") {
            has_png = true;
        } else if ext.is_some_and(|e| VIDEO_EXTENSIONS.contains(&e.as_str())) {
            dirs.push(path);
        }
    }
    if dirs.is_empty() && has_png {
        return Ok(vec![root]);
    }
    if dirs.is_empty() {
        return Err(PipelineError::NoVideos(input.to_path_buf()));
    }
    dirs.sort();
    Ok(dirs)
}

fn trace_name(unit_id: &str) -> String {
    format!("{}.json", unit_id.rsplit('/').next().unwrap_or(unit_id))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("traces serialize")
}

fn status_of(record: &LabelRecord, error: Option<String>) -> UnitStatus {
    let status = match (&error, record.flagged) {
        (Some(_), _) => UnitState::Failed,
        (None, true) => UnitState::Flagged,
        (None, false) => UnitState::Ok,
    };
    UnitStatus { unit_id: record.unit_id.clone(), status, error }
}

/// Codes every unit of one loaded video with the configured strategy.
pub fn code_video(ctx: &Context, seq: &FrameSequence) -> Result<VideoResult, PipelineError> {
    let units: Vec<EvaluationUnit> = segment_fixed(seq, ctx.cfg.window_s)?;
    let mut result = VideoResult {
        name: seq.name.clone(),
        n_frames: seq.len(),
        records: Vec::new(),
        candidates: None,
        traces: Vec::new(),
        statuses: Vec::new(),
    };
    match ctx.cfg.mode {
        Mode::Single => {
            let outcomes: Vec<_> = units.par_iter().map(|u| (u, few_shot_classify(ctx, u, seq))).collect();
            for (u, outcome) in outcomes {
                let (record, error) = match outcome {
                    Ok((record, exchange)) => {
                        result.traces.push((trace_name(&u.unit_id), to_json(&exchange)));
                        (record, None)
                    }
                    Err(e) => (LabelRecord::flagged_empty(&u.unit_id), Some(e.to_string())),
                };
                result.statuses.push(status_of(&record, error));
                result.records.push(record);
            }
        }
        Mode::Workflow => match run_workflow(ctx, seq, &units) {
            Ok(out) => {
                result.traces.push(("workflow.json".into(), to_json(&out.trace)));
                result.statuses = out.records.iter().map(|r| status_of(r, None)).collect();
                result.records = out.records;
                result.candidates = Some(out.candidate_records);
            }
            Err(e) => {
                result.records = units.iter().map(|u| LabelRecord::flagged_empty(&u.unit_id)).collect();
                result.statuses = result.records.iter().map(|r| status_of(r, Some(e.to_string()))).collect();
                result.candidates = Some(result.records.clone());
            }
        },
        Mode::React => {
            let outcomes: Vec<_> = units.par_iter().map(|u| run_react(ctx, u, seq)).collect();
            for (record, trace) in outcomes {
                result.traces.push((trace_name(&record.unit_id), to_json(&trace)));
                result.statuses.push(status_of(&record, None));
                result.records.push(record);
            }
        }
    }
    Ok(result)
}

/// Everything a finished run produced, in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub videos: Vec<VideoResult>,
    pub manifest: RunManifest,
}

impl RunOutput {
    pub fn records(&self) -> Vec<LabelRecord> {
        self.videos.iter().flat_map(|v| v.records.iter().cloned()).collect()
    }

    pub fn candidate_records(&self) -> Option<Vec<LabelRecord>> {
        self.videos.iter().map(|v| v.candidates.clone()).collect::<Option<Vec<_>>>().map(|v| v.concat())
    }

    /// Writes predictions, traces and the manifest under `out`.
    pub fn write(&self, out: &Path) -> Result<(), PipelineError> {
        fs::create_dir_all(out).map_err(io_err(out))?;
        let write = |path: PathBuf, text: &str| fs::write(&path, text).map_err(io_err(&path));
        write(out.join("predictions.tsv"), &render_labels(&self.records(), LabelFormat::Tsv))?;
        if let Some(c) = self.candidate_records() {
            write(out.join("candidates.tsv"), &render_labels(&c, LabelFormat::Tsv))?;
        }
        for v in &self.videos {
            let dir = out.join("traces").join(&v.name);
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            for (name, json) in &v.traces {
                write(dir.join(name), json)?;
            }
        }
        write(out.join("manifest.json"), &to_json(&self.manifest))?;
        Ok(())
    }
}

/// Loads and codes every video under `input` on a pool of `cfg.jobs` workers.
pub fn run_corpus(cfg: &RunConfig, vlm: &dyn VisionLanguageModel, input: &Path) -> Result<RunOutput, PipelineError> {
    let prompts = load_prompts(cfg)?;
    let ctx = Context::new(cfg, &prompts, vlm);
    let sources = discover_videos(input)?;
    let decoder = cfg.decoder.as_deref().map(DecoderCommand::new);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build().map_err(|e| PipelineError::Pool(e.to_string()))?;
    let videos: Vec<VideoResult> = pool.install(|| {
        sources
            .par_iter()
            .map(|src| {
                let seq = load_frame_sequence(src, cfg.fps, decoder.as_ref())?;
                code_video(&ctx, &seq)
            })
            .collect::<Result<_, PipelineError>>()
    })?;
    let statuses = videos.iter().flat_map(|v| &v.statuses);
    let count = |s: UnitState| statuses.clone().filter(|u| u.status == s).count();
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        mode: cfg.mode,
        seed: cfg.seed,
        input: input.display().to_string(),
        config: cfg.clone(),
        units_total: statuses.clone().count(),
        units_ok: count(UnitState::Ok),
        units_flagged: count(UnitState::Flagged),
        units_failed: count(UnitState::Failed),
        videos: videos
            .iter()
            .map(|v| VideoManifest { name: v.name.clone(), n_frames: v.n_frames, units: v.statuses.clone() })
            .collect(),
    };
    Ok(RunOutput { videos, manifest })
}
