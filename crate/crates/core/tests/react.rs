mod common;

use proptest::prelude::*;
use screencode::config::{ReactConfig, RunConfig};
use screencode::context::Context;
use screencode::ingest::{segment_fixed, FrameSequence};
use screencode::prompts::PromptSet;
use screencode::react::{react_step, reflect, run_react, ReactState, ReactTrace, Tools};
use screencode::record::EvaluationUnit;
use screencode::taxonomy::{Action, Scene};
use screencode::vlm::{MockScript, MockVlm, StructuredLabel};
use serde_json::json;

use common::{span, timeline};

fn step(thought: &str, action: &str, input: serde_json::Value) -> String {
    json!({"thought": thought, "action": action, "action_input": input}).to_string()
}

fn unit_and_seq(spans: Vec<screencode::synth::SpanSpec>, seed: u64) -> (EvaluationUnit, FrameSequence, screencode::synth::Corpus) {
    let corpus = timeline(seed, spans);
    let seq = corpus.videos[0].sequence();
    let unit = segment_fixed(&seq, 20.0).unwrap().remove(0);
    (unit, seq, corpus)
}

fn label(scenes: &[Scene], actions: &[(Action, f64)]) -> StructuredLabel {
    StructuredLabel {
        scenes: scenes.iter().copied().collect(),
        actions: actions.iter().map(|&(a, _)| a).collect(),
        confidences: actions.iter().copied().collect(),
        ..Default::default()
    }
}

#[test]
fn three_step_transcript_on_docs_typing() {
    let (unit, seq, corpus) = unit_and_seq(vec![span(Scene::Docs, 20.0, Action::GroupDocumentCoEditing)], 21);
    let vlm = MockVlm::new(corpus.mock_script());
    let (cfg, prompts) = (RunConfig::default(), PromptSet::builtin());
    let ctx = Context::new(&cfg, &prompts, &vlm);
    let (record, trace) = run_react(&ctx, &unit, &seq);
    assert_eq!(record.scenes, [Scene::Docs].into());
    assert_eq!(record.actions, [Action::GroupDocumentCoEditing].into());
    assert!(!record.flagged);
    let names: Vec<_> = trace.steps.iter().map(|s| s.action_name.as_str()).collect();
    assert_eq!(names, ["CursorProbe", "ClassifyBehavior", "Finish"]);
    assert!(trace.finished);
    assert!(trace.steps[0].observation.contains("pattern: "));
}

#[test]
fn single_cursor_probe_step_appends_one_entry() {
    let (unit, seq, _) = unit_and_seq(vec![span(Scene::Web, 20.0, Action::ReadingWithHighlighting)], 22);
    let script = MockScript::new("").rule("v000/u00/step1", step("Where is the pointer?", "CursorProbe", json!("")));
    let vlm = MockVlm::new(script);
    let (cfg, prompts) = (RunConfig::default(), PromptSet::builtin());
    let ctx = Context::new(&cfg, &prompts, &vlm);
    let tools = Tools { ctx: &ctx, unit: &unit, seq: &seq };
    let state = react_step(ReactState::new(&unit.unit_id), &tools, 8);
    assert_eq!(state.step, 1);
    assert!(!state.done);
    assert_eq!(state.scratchpad.len(), 1);
    let e = &state.scratchpad[0];
    assert_eq!((e.thought.as_str(), e.action_name.as_str()), ("Where is the pointer?", "CursorProbe"));
    assert!(e.observation.contains("pattern: LinearHorizontal"), "{}", e.observation);
}

#[test]
fn finish_step_ends_the_loop_with_its_label() {
    let (unit, seq, _) = unit_and_seq(vec![span(Scene::Web, 20.0, Action::SearchingInternet)], 23);
    let coding = json!({"scenes": ["web"], "actions": ["searching_internet"], "confidences": {"searching_internet": 0.7}});
    let vlm = MockVlm::new(MockScript::new("").rule("v000/u00/step1", step("Obvious search page.", "Finish", coding)));
    let (cfg, prompts) = (RunConfig::default(), PromptSet::builtin());
    let ctx = Context::new(&cfg, &prompts, &vlm);
    let tools = Tools { ctx: &ctx, unit: &unit, seq: &seq };
    let state = react_step(ReactState::new(&unit.unit_id), &tools, 8);
    assert!(state.done);
    let l = state.final_label.unwrap();
    assert_eq!(l.actions, [Action::SearchingInternet].into());
    assert_eq!(l.confidence(Action::SearchingInternet), 0.7);
}

#[test]
fn gibberish_reply_is_an_invalid_action_step() {
    let (unit, seq, _) = unit_and_seq(vec![span(Scene::Web, 20.0, Action::SearchingInternet)], 24);
    let vlm = MockVlm::new(MockScript::new("blah blah {not an object"));
    let (cfg, prompts) = (RunConfig::default(), PromptSet::builtin());
    let ctx = Context::new(&cfg, &prompts, &vlm);
    let tools = Tools { ctx: &ctx, unit: &unit, seq: &seq };
    let state = react_step(ReactState::new(&unit.unit_id), &tools, 8);
    assert_eq!(state.step, 1);
    assert!(!state.done);
    assert!(state.scratchpad[0].observation.starts_with("invalid action, choose from: SegmentProbe"));
}

#[test]
fn provider_error_is_recorded_as_an_observation() {
    let (unit, seq, _) = unit_and_seq(vec![span(Scene::Web, 20.0, Action::SearchingInternet)], 25);
    let vlm = MockVlm::new(MockScript::new("!error upstream down"));
    let (cfg, prompts) = (RunConfig::default(), PromptSet::builtin());
    let ctx = Context::new(&cfg, &prompts, &vlm);
    let tools = Tools { ctx: &ctx, unit: &unit, seq: &seq };
    let state = react_step(ReactState::new(&unit.unit_id), &tools, 8);
    assert_eq!(state.step, 1);
    assert!(state.scratchpad[0].observation.starts_with("error: "), "{}", state.scratchpad[0].observation);
}

#[test]
fn loop_without_finish_stops_after_max_steps() {
    let (unit, seq, _) = unit_and_seq(vec![span(Scene::Gai, 20.0, Action::PromptingGai)], 26);
    let vlm = MockVlm::new(MockScript::new(step("Look again.", "ShiftProbe", json!(""))));
    let (cfg, prompts) = (RunConfig::default(), PromptSet::builtin());
    let ctx = Context::new(&cfg, &prompts, &vlm);
    let (record, trace) = run_react(&ctx, &unit, &seq);
    assert_eq!(trace.steps.len(), 8);
    assert!(!trace.finished);
    assert!(record.flagged);
    assert!(record.scenes.is_empty() && record.actions.is_empty());
    assert_eq!(vlm.calls(), 8);
}

#[test]
fn static_pointer_over_scrolling_page_is_coded_as_scrolling() {
    let (unit, seq, _) = unit_and_seq(vec![span(Scene::Docs, 20.0, Action::ReadingWithScrolling)], 27);
    let coding = json!({
        "scenes": ["docs"],
        "actions": ["reading_with_scrolling"],
        "confidences": {"reading_with_scrolling": 0.8},
        "evidence": {"reading_with_scrolling": "content moves up while the pointer rests"}
    });
    let script = MockScript::new("")
        .rule("v000/u00/step1", step("The pointer barely moves; is this freezing?", "CursorProbe", json!("")))
        .rule("v000/u00/step2", step("Check whether the content moves even though the pointer rests.", "ShiftProbe", json!("")))
        .rule("v000/u00/step3", step("Content shifts with a resting pointer: scrolling, not freezing.", "Finish", coding));
    let vlm = MockVlm::new(script);
    let (cfg, prompts) = (RunConfig::default(), PromptSet::builtin());
    let ctx = Context::new(&cfg, &prompts, &vlm);
    let (record, trace) = run_react(&ctx, &unit, &seq);
    assert_eq!(record.actions, [Action::ReadingWithScrolling].into());
    assert!(!record.flagged);
    let probe = &trace.steps[1];
    assert_eq!(probe.action_name, "ShiftProbe");
    assert!(probe.observation.starts_with("vertical content shift in"), "{}", probe.observation);
    assert!(trace.steps[2].thought.contains("not freezing"));
}

#[test]
fn reflect_lowers_incompatible_confidence_and_flags() {
    let cfg = ReactConfig::default();
    let state = ReactState::new("v/u00");
    let r = reflect(&label(&[Scene::Web], &[(Action::PromptingGai, 0.8)]), &state, &cfg);
    assert!((r.confidences[&Action::PromptingGai] - 0.5).abs() < 1e-12);
    assert!(r.flagged);
    assert!(r.actions.contains(&Action::PromptingGai));
    assert!(r.evidence[&Action::PromptingGai].contains("reflection"));
}

#[test]
fn reflect_leaves_compatible_confident_records_alone() {
    let cfg = ReactConfig::default();
    let state = ReactState::new("v/u00");
    let l = label(&[Scene::Docs], &[(Action::TickingAnswers, 0.9), (Action::ReadingWithScrolling, 0.5)]);
    let r = reflect(&l, &state, &cfg);
    assert!(!r.flagged);
    assert_eq!(r.confidences[&Action::TickingAnswers], 0.9);
    assert_eq!(r.confidences[&Action::ReadingWithScrolling], 0.5);
}

#[test]
fn reflect_flags_low_confidence() {
    let r = reflect(&label(&[Scene::Gai], &[(Action::PromptingGai, 0.2)]), &ReactState::new("u"), &ReactConfig::default());
    assert!(r.flagged);
    assert_eq!(r.confidences[&Action::PromptingGai], 0.2);
}

#[test]
fn trace_round_trips_through_json() {
    let (unit, seq, corpus) = unit_and_seq(vec![span(Scene::Web, 20.0, Action::CopyAndPaste)], 28);
    let vlm = MockVlm::new(corpus.mock_script());
    let (cfg, prompts) = (RunConfig::default(), PromptSet::builtin());
    let ctx = Context::new(&cfg, &prompts, &vlm);
    let (_, trace) = run_react(&ctx, &unit, &seq);
    let text = serde_json::to_string_pretty(&trace).unwrap();
    let back: ReactTrace = serde_json::from_str(&text).unwrap();
    assert_eq!(back, trace);
    assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn trace_never_exceeds_max_steps(max_steps in 1usize..12, finish_at in 1usize..14) {
        let (unit, seq, _) = unit_and_seq(vec![span(Scene::Web, 20.0, Action::SearchingInternet)], 29);
        let coding = json!({"scenes": ["web"], "actions": ["searching_internet"]});
        let script = MockScript::new(step("probe", "SegmentProbe", json!("")))
            .rule(&format!("v000/u00/step{finish_at}"), step("done", "Finish", coding));
        let vlm = MockVlm::new(script);
        let cfg = RunConfig { react: ReactConfig { max_steps, ..ReactConfig::default() }, ..RunConfig::default() };
        let prompts = PromptSet::builtin();
        let ctx = Context::new(&cfg, &prompts, &vlm);
        let (record, trace) = run_react(&ctx, &unit, &seq);
        prop_assert!(trace.steps.len() <= max_steps);
        prop_assert_eq!(trace.finished, finish_at <= max_steps);
        prop_assert_eq!(trace.steps.len(), finish_at.min(max_steps));
        prop_assert_eq!(record.flagged, finish_at > max_steps);
    }
}
