//! Run configuration: one TOML file, every field optional, CLI flags override.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eval::VacuousF1;
use crate::vision::VisionConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Coding strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    #[default]
    Workflow,
    React,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Workflow => "workflow",
            Mode::React => "react",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(Mode::Single),
            "workflow" => Ok(Mode::Workflow),
            "react" => Ok(Mode::React),
            _ => Err(ConfigError::Invalid(format!("unknown mode {s:?} (expected single, workflow or react)"))),
        }
    }
}

/// Thresholds of the scene/behavior/validation workflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkflowConfig {
    /// Every n-th frame of a segment is shown to the model.
    pub frame_stride: usize,
    /// Candidates at or above this confidence survive failed evidence checks.
    pub override_confidence: f64,
    /// Minimum diff score for a frame pair to count as a localized change.
    pub localized_min_diff: f64,
    /// Maximum changed-region share of the frame for a localized change.
    pub localized_max_area: f64,
    /// Freezing requires every pairwise diff score below this.
    pub freeze_max_diff: f64,
    /// Padding (px) around the cursor activity box drawn on frames.
    pub attention_pad: u32,
}

impl Default for WorkflowConfig {
    fn default() -> Self {
        WorkflowConfig {
            frame_stride: 4,
            override_confidence: 0.85,
            localized_min_diff: 0.005,
            localized_max_area: 0.3,
            freeze_max_diff: 0.005,
            attention_pad: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReactConfig {
    pub max_steps: usize,
    /// Confidence penalty for scene-incompatible actions.
    pub lambda: f64,
    /// Records with any action below this confidence are flagged.
    pub review_threshold: f64,
}

impl Default for ReactConfig {
    fn default() -> Self {
        ReactConfig { max_steps: 8, lambda: 0.3, review_threshold: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub endpoint: Option<String>,
    pub model_id: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    /// Path of a scripted reply file; when set no provider is contacted.
    pub mock: Option<PathBuf>,
    pub fps: f64,
    pub window_s: f64,
    pub vision: VisionConfig,
    pub workflow: WorkflowConfig,
    pub react: ReactConfig,
    /// Maximum images per request.
    pub image_budget: usize,
    pub exemplars: usize,
    pub rate_limit_rpm: f64,
    pub timeout_s: u64,
    pub retries: u32,
    /// Directory whose template files replace the built-in ones.
    pub prompt_dir: Option<PathBuf>,
    /// Embed fixture tags in prompts.
    pub fixture_tags: bool,
    pub jobs: usize,
    /// Decoder command template for video files, e.g. `ffmpeg -i {input} -vf fps={fps} {output}/frame_%05d.png`.
    pub decoder: Option<String>,
    pub seed: u64,
    pub vacuous_f1: VacuousF1,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::default(),
            endpoint: None,
            model_id: "gpt-4.1".into(),
            api_key_env: "SCREENCODE_API_KEY".into(),
            mock: None,
            fps: 1.0,
            window_s: 20.0,
            vision: VisionConfig::default(),
            workflow: WorkflowConfig::default(),
            react: ReactConfig::default(),
            image_budget: 20,
            exemplars: 3,
            rate_limit_rpm: 60.0,
            timeout_s: 120,
            retries: 3,
            prompt_dir: None,
            fixture_tags: true,
            jobs: 4,
            decoder: None,
            seed: 0,
            vacuous_f1: VacuousF1::default(),
        }
    }
}

fn unit_interval(name: &str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} must be in [0, 1], got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.display().to_string(), message: e.to_string() })?;
        toml::from_str(&text).map_err(|e| ConfigError::Read { path: path.display().to_string(), message: e.to_string() })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Checks ranges and that a provider is reachable in principle: without a
    /// mock script an endpoint is required.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.mock.is_none() && self.endpoint.as_deref().is_none_or(str::is_empty) {
            return Err(ConfigError::Invalid("an endpoint is required unless a mock script is given".into()));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(ConfigError::Invalid(format!("fps must be positive, got {}", self.fps)));
        }
        if !(self.window_s > 0.0 && self.window_s.is_finite()) {
            return Err(ConfigError::Invalid(format!("window_s must be positive, got {}", self.window_s)));
        }
        self.vision.validate().map_err(ConfigError::Invalid)?;
        let w = &self.workflow;
        if w.frame_stride == 0 {
            return Err(ConfigError::Invalid("workflow.frame_stride must be at least 1".into()));
        }
        unit_interval("workflow.override_confidence", w.override_confidence)?;
        unit_interval("workflow.localized_min_diff", w.localized_min_diff)?;
        unit_interval("workflow.localized_max_area", w.localized_max_area)?;
        unit_interval("workflow.freeze_max_diff", w.freeze_max_diff)?;
        if self.react.max_steps == 0 {
            return Err(ConfigError::Invalid("react.max_steps must be at least 1".into()));
        }
        unit_interval("react.lambda", self.react.lambda)?;
        unit_interval("react.review_threshold", self.react.review_threshold)?;
        if self.image_budget == 0 {
            return Err(ConfigError::Invalid("image_budget must be at least 1".into()));
        }
        if self.exemplars == 0 {
            return Err(ConfigError::Invalid("exemplars must be at least 1".into()));
        }
        if !(self.rate_limit_rpm > 0.0) {
            return Err(ConfigError::Invalid("rate_limit_rpm must be positive".into()));
        }
        if self.jobs == 0 {
            return Err(ConfigError::Invalid("jobs must be at least 1".into()));
        }
        if self.model_id.trim().is_empty() {
            return Err(ConfigError::Invalid("model_id must not be empty".into()));
        }
        Ok(())
    }
}
