//! Automatic coding of on-screen collaborative-learning behaviors from
//! screen-recording frame sequences.

pub mod baseline;
pub mod cli;
pub mod config;
pub mod context;
pub mod eval;
pub mod ingest;
pub mod labels;
pub mod pipeline;
pub mod prompts;
pub mod react;
pub mod record;
pub mod synth;
pub mod tags;
pub mod taxonomy;
pub mod vision;
pub mod vlm;
pub mod workflow;
