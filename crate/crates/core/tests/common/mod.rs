#![allow(dead_code)]

use screencode::synth::{generate_corpus, Corpus, CorpusSpec, SpanSpec, VideoSpec};
use screencode::taxonomy::{Action, Scene};

pub fn span(scene: Scene, duration_s: f64, action: Action) -> SpanSpec {
    SpanSpec { scene, duration_s, action: Some(action) }
}

/// A one-video corpus with the given timeline.
pub fn timeline(seed: u64, spans: Vec<SpanSpec>) -> Corpus {
    let video_length_s = spans.iter().map(|s| s.duration_s).sum();
    let spec = CorpusSpec { seed, video_length_s, videos: vec![VideoSpec { name: None, spans }], ..CorpusSpec::default() };
    generate_corpus(&spec).expect("valid timeline")
}

pub fn random_corpus(seed: u64, n_videos: usize, inject: f64) -> Corpus {
    let spec = CorpusSpec { seed, n_videos, video_length_s: 60.0, inject_incompatible: inject, ..CorpusSpec::default() };
    generate_corpus(&spec).expect("valid spec")
}
