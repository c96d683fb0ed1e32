//! Command-line interface: `run`, `eval` and `synth`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{Mode, RunConfig};
use crate::eval::{evaluate_corpus, VacuousF1};
use crate::pipeline::{build_vlm, run_corpus};
use crate::synth::{generate_corpus, CorpusSpec, SynthError};
use crate::vlm::VlmError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "screencode", version, about = "Code on-screen learning behaviors in screen recordings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify every unit of a corpus and write predictions, traces and a manifest.
    Run(RunArgs),
    /// Score predictions against gold labels.
    Eval(EvalArgs),
    /// Generate a synthetic corpus with gold labels and a scripted reply file.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Corpus directory (frame directories or video files, or a synth output).
    #[arg(long = "in", value_name = "DIR")]
    input: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// TOML config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Scripted reply file; no provider is contacted.
    #[arg(long, value_name = "FILE")]
    mock: Option<PathBuf>,
    /// Base URL of an OpenAI-compatible API, e.g. https://api.openai.com/v1
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long, value_name = "NAME")]
    api_key_env: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    fps: Option<f64>,
    #[arg(long)]
    window_s: Option<f64>,
    #[arg(long)]
    image_budget: Option<usize>,
    #[arg(long)]
    exemplars: Option<usize>,
    /// Requests per minute across all workers.
    #[arg(long)]
    rate_limit: Option<f64>,
    #[arg(long, value_name = "DIR")]
    prompt_dir: Option<PathBuf>,
    /// Decoder command for video files, with {input}, {output} and {fps} placeholders.
    #[arg(long, value_name = "CMD")]
    decoder: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Do not embed fixture tags in prompts.
    #[arg(long)]
    no_fixture_tags: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Single,
    Workflow,
    React,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Single => Mode::Single,
            ModeArg::Workflow => Mode::Workflow,
            ModeArg::React => Mode::React,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VacuousArg {
    One,
    Zero,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    gold: PathBuf,
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
    /// Also write the JSON report here.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// F1 of a class with no positives in gold or predictions.
    #[arg(long, value_enum, default_value = "one")]
    vacuous_f1: VacuousArg,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Corpus spec (TOML, or JSON by extension). Without it a random corpus is generated.
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random videos when no spec is given.
    #[arg(long, default_value_t = 10)]
    n_videos: usize,
    /// Video length in seconds when no spec is given.
    #[arg(long, default_value_t = 60.0)]
    length_s: f64,
    /// Share of units whose scripted replies get a scene-incompatible action.
    #[arg(long)]
    inject_incompatible: Option<f64>,
}

/// A failure and the exit code it maps to.
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn run_config(args: &RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p).map_err(|e| Failure::Usage(e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(m) = args.mode {
        cfg.mode = m.into();
    }
    if args.mock.is_some() {
        cfg.mock = args.mock.clone();
    }
    if args.endpoint.is_some() {
        cfg.endpoint = args.endpoint.clone();
    }
    if let Some(v) = &args.model {
        cfg.model_id = v.clone();
    }
    if let Some(v) = &args.api_key_env {
        cfg.api_key_env = v.clone();
    }
    if let Some(v) = args.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = args.max_steps {
        cfg.react.max_steps = v;
    }
    if let Some(v) = args.lambda {
        cfg.react.lambda = v;
    }
    if let Some(v) = args.fps {
        cfg.fps = v;
    }
    if let Some(v) = args.window_s {
        cfg.window_s = v;
    }
    if let Some(v) = args.image_budget {
        cfg.image_budget = v;
    }
    if let Some(v) = args.exemplars {
        cfg.exemplars = v;
    }
    if let Some(v) = args.rate_limit {
        cfg.rate_limit_rpm = v;
    }
    if args.prompt_dir.is_some() {
        cfg.prompt_dir = args.prompt_dir.clone();
    }
    if args.decoder.is_some() {
        cfg.decoder = args.decoder.clone();
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if args.no_fixture_tags {
        cfg.fixture_tags = false;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let cfg = run_config(&args)?;
    let vlm = build_vlm(&cfg).map_err(|e| match e {
        VlmError::MissingCredentials(_) | VlmError::InvalidRequest(_) => Failure::Usage(e.to_string()),
        other => Failure::Runtime(anyhow::Error::new(other).context("cannot set up the model provider")),
    })?;
    let out = run_corpus(&cfg, vlm.as_ref(), &args.input).with_context(|| format!("run over {}", args.input.display()))?;
    out.write(&args.out).with_context(|| format!("writing results to {}", args.out.display()))?;
    let m = &out.manifest;
    eprintln!(
        "coded {} units ({} ok, {} flagged, {} failed) -> {}",
        m.units_total,
        m.units_ok,
        m.units_flagged,
        m.units_failed,
        args.out.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let vacuous = match args.vacuous_f1 {
        VacuousArg::One => VacuousF1::One,
        VacuousArg::Zero => VacuousF1::Zero,
    };
    let report = evaluate_corpus(&args.gold, &args.pred, vacuous).context("evaluation failed")?;
    if let Some(path) = &args.report {
        std::fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    match args.format {
        ReportFormat::Text => print!("{}", report.to_text()),
        ReportFormat::Json => println!("{}", report.to_json()),
    }
    Ok(())
}

fn synth_spec(args: &SynthArgs) -> Result<CorpusSpec, Failure> {
    let mut spec = match &args.spec {
        Some(p) => CorpusSpec::load(p).map_err(|e| Failure::Usage(e.to_string()))?,
        None => CorpusSpec { n_videos: args.n_videos, video_length_s: args.length_s, ..CorpusSpec::default() },
    };
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(p) = args.inject_incompatible {
        spec.inject_incompatible = p;
    }
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(spec)
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    let spec = synth_spec(&args)?;
    let corpus = generate_corpus(&spec).map_err(|e| match e {
        SynthError::Io { .. } => Failure::Runtime(e.into()),
        other => Failure::Usage(other.to_string()),
    })?;
    corpus.write(&args.out).with_context(|| format!("writing corpus to {}", args.out.display()))?;
    eprintln!(
        "wrote {} videos, {} units -> {}",
        corpus.videos.len(),
        corpus.gold.len(),
        Path::new(&args.out).display()
    );
    Ok(())
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}
