mod common;

use screencode::baseline::{few_shot_classify, FewShotPrompt, PromptBuildError};
use screencode::config::RunConfig;
use screencode::context::Context;
use screencode::ingest::segment_fixed;
use screencode::prompts::PromptSet;
use screencode::taxonomy::{Action, Scene};
use screencode::vlm::{MockScript, MockVlm};

use common::{span, timeline};

fn classify_first_unit(corpus: &screencode::synth::Corpus, vlm: &MockVlm, cfg: &RunConfig) -> screencode::record::LabelRecord {
    let seq = corpus.videos[0].sequence();
    let unit = segment_fixed(&seq, 20.0).unwrap().remove(0);
    let prompts = PromptSet::builtin();
    let ctx = Context::new(cfg, &prompts, vlm);
    few_shot_classify(&ctx, &unit, &seq).unwrap().0
}

#[test]
fn web_search_unit_with_gold_reply() {
    let corpus = timeline(31, vec![span(Scene::Web, 20.0, Action::SearchingInternet)]);
    let vlm = MockVlm::new(corpus.mock_script());
    let r = classify_first_unit(&corpus, &vlm, &RunConfig::default());
    assert_eq!(r.scenes, [Scene::Web].into());
    assert_eq!(r.actions, [Action::SearchingInternet].into());
    assert!(!r.flagged);
    assert_eq!(vlm.calls(), 1);
}

#[test]
fn frozen_unit_with_gold_reply() {
    let corpus = timeline(32, vec![span(Scene::Gai, 20.0, Action::Freezing)]);
    let vlm = MockVlm::new(corpus.mock_script());
    let r = classify_first_unit(&corpus, &vlm, &RunConfig::default());
    assert_eq!(r.actions, [Action::Freezing].into());
}

#[test]
fn garbage_twice_gives_flagged_empty_record() {
    let corpus = timeline(33, vec![span(Scene::Docs, 20.0, Action::TickingAnswers)]);
    let vlm = MockVlm::new(MockScript::new("Sorry, I cannot help with that."));
    let r = classify_first_unit(&corpus, &vlm, &RunConfig::default());
    assert!(r.flagged);
    assert!(r.scenes.is_empty() && r.actions.is_empty());
    assert_eq!(vlm.calls(), 2);
}

#[test]
fn garbage_then_valid_reply_recovers_on_retry() {
    let corpus = timeline(34, vec![span(Scene::Docs, 20.0, Action::TickingAnswers)]);
    let script = MockScript::new("nope").rule("v000/u00/retry", r#"{"scenes":["docs"],"actions":["ticking_answers"]}"#);
    let vlm = MockVlm::new(script);
    let r = classify_first_unit(&corpus, &vlm, &RunConfig::default());
    assert_eq!(r.actions, [Action::TickingAnswers].into());
    assert!(!r.flagged);
    assert_eq!(vlm.calls(), 2);
}

#[test]
fn prompt_respects_exemplar_and_image_limits() {
    let corpus = timeline(35, vec![span(Scene::Web, 40.0, Action::CopyAndPaste)]);
    let seq = corpus.videos[0].sequence();
    let unit = segment_fixed(&seq, 40.0).unwrap().remove(0);
    let prompts = PromptSet::builtin();
    let vlm = MockVlm::new(MockScript::new(""));
    let cfg = RunConfig::default();
    let ctx = Context::new(&cfg, &prompts, &vlm);
    let p = FewShotPrompt::build(&ctx, &unit).unwrap();
    assert_eq!(p.exemplars.len(), 3);
    assert!(p.unit_frames.len() <= 20);
    assert!(p.validate(20).is_ok());
    assert!(matches!(p.validate(2), Err(PromptBuildError::TooManyImages(..))));

    let none = RunConfig { exemplars: 0, ..RunConfig::default() };
    let ctx = Context::new(&none, &prompts, &vlm);
    assert!(matches!(FewShotPrompt::build(&ctx, &unit), Err(PromptBuildError::NoExemplars)));
}
