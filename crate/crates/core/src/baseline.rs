//! Single-call few-shot coder: one request per evaluation unit.

use crate::context::{label_to_record, sample_evenly, Context, Exchange};
use crate::ingest::FrameSequence;
use crate::prompts::fill;
use crate::record::{EvaluationUnit, LabelRecord};
use crate::tags;
use crate::vlm::{StructuredLabel, VlmError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptBuildError {
    #[error("a few-shot prompt needs at least one exemplar")]
    NoExemplars,
    #[error("{0} images exceed the budget of {1}")]
    TooManyImages(usize, usize),
}

/// A fully assembled few-shot request for one unit.
#[derive(Debug, Clone, PartialEq)]
pub struct FewShotPrompt {
    pub system_text: String,
    pub exemplars: Vec<(String, StructuredLabel)>,
    /// Positions of the attached frames within the sequence.
    pub unit_frames: Vec<usize>,
    pub user_text: String,
}

impl FewShotPrompt {
    pub fn build(ctx: &Context, unit: &EvaluationUnit) -> Result<Self, PromptBuildError> {
        let exemplars: Vec<(String, StructuredLabel)> = ctx
            .prompts
            .exemplars
            .iter()
            .take(ctx.cfg.exemplars)
            .map(|e| (e.description.clone(), e.label()))
            .collect();
        let unit_frames = sample_evenly(&unit.frame_indices, ctx.cfg.image_budget);
        let exemplar_text = exemplars
            .iter()
            .enumerate()
            .map(|(i, (d, l))| format!("Example {}: {d}\nAnswer: {}", i + 1, l.to_reply_json()))
            .collect::<Vec<_>>()
            .join("\n\n");
        let user_text = fill(
            &ctx.prompts.single,
            &[
                ("tag", &ctx.tag(&tags::unit_key(&unit.unit_id))),
                ("n_images", &unit_frames.len().to_string()),
                ("duration_s", &format!("{}", unit.duration_s)),
                ("start_s", &format!("{}", unit.start_s)),
                ("exemplars", &exemplar_text),
            ],
        );
        let prompt = FewShotPrompt { system_text: ctx.prompts.system_text(), exemplars, unit_frames, user_text };
        prompt.validate(ctx.cfg.image_budget)?;
        Ok(prompt)
    }

    pub fn validate(&self, image_budget: usize) -> Result<(), PromptBuildError> {
        if self.exemplars.is_empty() {
            return Err(PromptBuildError::NoExemplars);
        }
        if self.unit_frames.len() > image_budget {
            return Err(PromptBuildError::TooManyImages(self.unit_frames.len(), image_budget));
        }
        Ok(())
    }
}

/// Codes one unit with a single request (two if the first reply is unparsable).
///
/// Two unparsable replies give an empty flagged record. Provider errors are
/// returned to the caller.
pub fn few_shot_classify(
    ctx: &Context,
    unit: &EvaluationUnit,
    seq: &FrameSequence,
) -> Result<(LabelRecord, Exchange), VlmError> {
    let prompt = FewShotPrompt::build(ctx, unit).map_err(|e| VlmError::InvalidRequest(e.to_string()))?;
    let frames: Vec<_> = prompt.unit_frames.iter().filter_map(|&i| seq.get(i)).collect();
    let (label, exchange) = ctx.ask_label(&tags::unit_key(&unit.unit_id), prompt.user_text, &frames)?;
    let record = match label {
        Some(l) => label_to_record(&unit.unit_id, &l),
        None => LabelRecord::flagged_empty(&unit.unit_id),
    };
    Ok((record, exchange))
}
