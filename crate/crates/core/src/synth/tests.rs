use std::collections::BTreeMap;
use std::sync::Arc;

use super::*;
use crate::corpus::{build_transcript, dialogues_to_json, validate_dialogue, JsonMap, Role};
use crate::provider::{MockProvider, MockScript};

const PROFILE_JSON: &str = r#"{
    "openness": {"level": "high", "rationale": "asks broad questions"},
    "conscientiousness": {"level": "low", "rationale": "mentions missed deadlines"},
    "extraversion": {"level": "medium", "rationale": "mixed social signals"},
    "agreeableness": {"level": "high", "rationale": "avoids conflict"},
    "neuroticism": {"level": "high", "rationale": "catastrophizing wording"}
}"#;

fn topic(raw: &str) -> TopicId {
    TopicId::new(raw).unwrap()
}

fn make_case(topic_raw: &str) -> CounselingCase {
    CounselingCase {
        id: format!("case-{topic_raw}"),
        topic: topic(topic_raw),
        transcript: build_transcript([
            (Role::Client, format!("I struggle with {topic_raw}.")),
            (
                Role::Counselor,
                "What does that look like day to day?".to_string(),
            ),
            (Role::Client, "It keeps me up at night.".to_string()),
            (
                Role::Counselor,
                "Let's unpack what you tell yourself then.".to_string(),
            ),
        ]),
        sanitized: true,
        extra: JsonMap::new(),
    }
}

fn make_seed(id: &str, topic_raw: &str) -> SingleTurnDialogue {
    SingleTurnDialogue {
        id: id.to_string(),
        topic: topic(topic_raw),
        title: format!("Trouble with {topic_raw}"),
        detail: format!("A detailed account of my {topic_raw} problem ({id})."),
        counselor_response: "A long written reply with advice.".to_string(),
        extra: JsonMap::new(),
    }
}

fn make_style(topic_raw: &str) -> LinguisticStyleProfile {
    LinguisticStyleProfile {
        topic: topic(topic_raw),
        summary: format!("Gentle, question-led style for {topic_raw}."),
        source_case_id: format!("case-{topic_raw}"),
    }
}

fn rebt_entry() -> TherapyTechniqueEntry {
    crate::style::TechniqueKB::builtin()
        .resolve("REBT")
        .unwrap()
        .clone()
}

fn sample_persona() -> PersonalityProfile {
    crate::persona::parse_personality(PROFILE_JSON).unwrap()
}

fn make_context(topic_raw: &str, seed_id: &str) -> SynthesisContext {
    SynthesisContext::new(
        make_case(topic_raw),
        make_style(topic_raw),
        rebt_entry(),
        topic(topic_raw),
        sample_persona(),
        make_seed(seed_id, topic_raw),
        DEFAULT_EMOTION_GUIDE,
        DEFAULT_RESPONSE_GUIDE,
    )
    .unwrap()
}

/// A valid alternating transcript with `turns` utterances, flavored by `id`.
fn valid_transcript_text(id: &str, turns: usize) -> String {
    (0..turns)
        .map(|i| {
            if i % 2 == 0 {
                format!("client: message {i} about my problem ({id})")
            } else {
                format!("counselor: reply {i} for {id}")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Builds a full mock script for the given topics and seeds.
fn pipeline_script(topics: &[&str], seeds: &[SingleTurnDialogue]) -> MockScript {
    let mut script = MockScript::default();
    for t in topics {
        script.insert(format!("style:{t}"), vec![format!("warm style for {t}")]);
        script.insert(
            format!("ttype:{t}"),
            vec!["Rational Emotive Behavior Therapy".to_string()],
        );
    }
    for seed in seeds {
        script.insert(
            format!("persona:{}", seed.id),
            vec![PROFILE_JSON.to_string()],
        );
        script.insert(
            format!("synthesize:{}", seed.id),
            vec![valid_transcript_text(&seed.id, 6)],
        );
    }
    script
}

#[test]
fn context_rejects_cross_topic_components() {
    let err = SynthesisContext::new(
        make_case("career"),
        make_style("anxiety"),
        rebt_entry(),
        topic("anxiety"),
        sample_persona(),
        make_seed("s1", "anxiety"),
        DEFAULT_EMOTION_GUIDE,
        DEFAULT_RESPONSE_GUIDE,
    )
    .unwrap_err();
    assert!(matches!(err, SynthError::TopicMismatch { .. }));
}

#[test]
fn ablation_replaces_exactly_one_component_and_is_idempotent() {
    let ctx = make_context("anxiety", "s1");

    let no_style = ablate_context(&ctx, AblationTarget::Style);
    assert_eq!(no_style.style().summary, NEUTRAL_STYLE_SUMMARY);
    assert_eq!(no_style.technique(), ctx.technique());
    assert_eq!(no_style.persona(), ctx.persona());
    assert_eq!(ablate_context(&no_style, AblationTarget::Style), no_style);

    let no_technique = ablate_context(&ctx, AblationTarget::Technique);
    assert_eq!(no_technique.technique(), &neutral_technique());
    assert_eq!(no_technique.style(), ctx.style());

    let no_persona = ablate_context(&ctx, AblationTarget::Persona);
    for (_, rating) in no_persona.persona().dimensions() {
        assert_eq!(rating.level, crate::corpus::TraitLevel::Medium);
    }
    assert_eq!(
        ablate_context(&no_persona, AblationTarget::Persona),
        no_persona
    );
}

#[test]
fn match_ops_normalize_topics_and_report_misses() {
    let styles: BTreeMap<TopicId, LinguisticStyleProfile> =
        [(topic("relationship"), make_style("relationship"))].into();
    let techniques: BTreeMap<TopicId, TherapyTechniqueEntry> =
        [(topic("relationship"), rebt_entry())].into();

    assert!(match_style("Relationship ", &styles).is_ok());
    assert!(match_technique("RELATIONSHIP", &techniques).is_ok());

    let err = match_style("career", &styles).unwrap_err();
    assert!(matches!(err, SynthError::NoStyleForTopic { topic } if topic == "career"));
    let err = match_technique("career", &techniques).unwrap_err();
    assert!(matches!(err, SynthError::NoTechniqueForTopic { topic } if topic == "career"));
}

#[test]
fn full_topic_coverage_means_zero_match_errors() {
    // 12-topic resource maps, 240 seeds spanning those topics (20 each).
    let topics: Vec<String> = (0..12).map(|i| format!("topic {i}")).collect();
    let styles: BTreeMap<TopicId, LinguisticStyleProfile> =
        topics.iter().map(|t| (topic(t), make_style(t))).collect();
    let techniques: BTreeMap<TopicId, TherapyTechniqueEntry> =
        topics.iter().map(|t| (topic(t), rebt_entry())).collect();
    let seeds: Vec<SingleTurnDialogue> = (0..240)
        .map(|i| make_seed(&format!("s{i}"), &topics[i % 12]))
        .collect();

    // Oracle: the seeds' topic set is contained in the map key sets.
    let seed_topics: std::collections::BTreeSet<&TopicId> =
        seeds.iter().map(|s| &s.topic).collect();
    assert!(seed_topics.iter().all(|t| styles.contains_key(*t)));
    assert!(seed_topics.iter().all(|t| techniques.contains_key(*t)));

    for seed in &seeds {
        assert!(match_style(seed.topic.as_str(), &styles).is_ok());
        assert!(match_technique(seed.topic.as_str(), &techniques).is_ok());
    }
}

#[test]
fn prompt_contains_seed_detail_verbatim() {
    let ctx = make_context("anxiety", "s1");
    let template = TemplateStore::builtin().load("synthesis", None).unwrap();
    let prompt = build_synthesis_prompt(&ctx, &template, &SynthesisConfig::default()).unwrap();
    assert!(prompt.contains(&ctx.seed_dialogue().detail));
    assert!(prompt.contains(&ctx.style().summary));
    assert!(prompt.contains("Debate Irrational Beliefs"));
}

#[test]
fn persona_changes_stay_local_to_the_persona_region() {
    let ctx_a = make_context("anxiety", "s1");
    let ctx_b = ablate_context(&ctx_a, AblationTarget::Persona);
    let template = TemplateStore::builtin().load("synthesis", None).unwrap();
    let config = SynthesisConfig::default();
    let prompt_a = build_synthesis_prompt(&ctx_a, &template, &config).unwrap();
    let prompt_b = build_synthesis_prompt(&ctx_b, &template, &config).unwrap();
    assert_ne!(prompt_a, prompt_b);

    // Replacing each persona rendering with a fixed token must make the
    // prompts identical: nothing outside that region may change.
    let persona_a = super::render_persona(ctx_a.persona());
    let persona_b = super::render_persona(ctx_b.persona());
    assert_eq!(
        prompt_a.replace(&persona_a, "<persona>"),
        prompt_b.replace(&persona_b, "<persona>")
    );
}

#[test]
fn strict_guides_reject_empty_emotion_guide() {
    let mut config = SynthesisConfig {
        emotion_guide: "   ".to_string(),
        ..SynthesisConfig::default()
    };
    let ctx = SynthesisContext::new(
        make_case("anxiety"),
        make_style("anxiety"),
        rebt_entry(),
        topic("anxiety"),
        sample_persona(),
        make_seed("s1", "anxiety"),
        config.emotion_guide.clone(),
        config.response_guide.clone(),
    )
    .unwrap();
    let template = TemplateStore::builtin().load("synthesis", None).unwrap();
    let err = build_synthesis_prompt(&ctx, &template, &config).unwrap_err();
    assert!(matches!(
        err,
        SynthError::Template(TemplateError::MissingSlot { slot }) if slot == "emotion_guide"
    ));

    config.strict_guides = false;
    assert!(build_synthesis_prompt(&ctx, &template, &config).is_ok());
}

fn resources_for(topics: &[&str]) -> SynthesisResources {
    SynthesisResources {
        exemplars: topics.iter().map(|t| (topic(t), make_case(t))).collect(),
        styles: topics.iter().map(|t| (topic(t), make_style(t))).collect(),
        techniques: topics.iter().map(|t| (topic(t), rebt_entry())).collect(),
        personas: BTreeMap::new(),
    }
}

#[test]
fn synthesize_valid_reply_first_try() {
    let seed = make_seed("s1", "anxiety");
    let mut script = MockScript::default();
    script.insert("persona:s1", vec![PROFILE_JSON.to_string()]);
    script.insert("synthesize:s1", vec![valid_transcript_text("s1", 6)]);
    let provider = MockProvider::new(script);
    let outcome = synthesize_dialogue(
        &seed,
        &resources_for(&["anxiety"]),
        &provider,
        &TemplateStore::builtin(),
        &SynthesisConfig::default(),
    )
    .unwrap();
    assert_eq!(outcome.attempts, 1);
    assert_eq!(outcome.dialogue.transcript.len(), 6);
    assert!(validate_dialogue(&outcome.dialogue).is_valid());
    let provenance = outcome.dialogue.provenance.as_ref().unwrap();
    assert_eq!(provenance.source_single_turn_id, "s1");
    assert_eq!(provenance.template_version, "synthesis/v1");
    assert_eq!(provenance.seed, per_seed_rng(42, "s1"));
}

#[test]
fn synthesize_retries_with_feedback_then_succeeds() {
    let seed = make_seed("s1", "anxiety");
    let mut script = MockScript::default();
    script.insert("persona:s1", vec![PROFILE_JSON.to_string()]);
    script.insert(
        "synthesize:s1",
        vec![
            "counselor: starts on the wrong foot\nclient: oops".to_string(),
            valid_transcript_text("s1", 6),
        ],
    );
    let provider = MockProvider::new(script);
    let outcome = synthesize_dialogue(
        &seed,
        &resources_for(&["anxiety"]),
        &provider,
        &TemplateStore::builtin(),
        &SynthesisConfig::default(),
    )
    .unwrap();
    assert_eq!(outcome.attempts, 2);
}

#[test]
fn synthesize_exhausts_budget_and_reports_every_attempt() {
    let seed = make_seed("s1", "anxiety");
    let mut script = MockScript::default();
    script.insert("persona:s1", vec![PROFILE_JSON.to_string()]);
    script.insert("synthesize:s1", vec!["no labels at all".to_string()]);
    let provider = MockProvider::new(script);
    let err = synthesize_dialogue(
        &seed,
        &resources_for(&["anxiety"]),
        &provider,
        &TemplateStore::builtin(),
        &SynthesisConfig::default(),
    )
    .unwrap_err();
    match err {
        SynthError::SynthesisFailed { seed_id, attempts } => {
            assert_eq!(seed_id, "s1");
            assert_eq!(attempts.len(), 3);
            assert!(attempts
                .iter()
                .all(|a| a.report.contains("no speaker labels")));
        }
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn pipeline_small_run_is_ordered_valid_and_deterministic() {
    let topics = ["anxiety", "career", "relationship"];
    let seeds: Vec<SingleTurnDialogue> = (0..6)
        .map(|i| make_seed(&format!("s{i}"), topics[i % 3]))
        .collect();
    let cases: Vec<CounselingCase> = topics.iter().map(|t| make_case(t)).collect();
    let config = SynthesisConfig {
        concurrency: 3,
        ..SynthesisConfig::default()
    };

    let run = |seeds: &[SingleTurnDialogue]| {
        let provider: Arc<dyn ChatProvider> =
            Arc::new(MockProvider::new(pipeline_script(&topics, seeds)));
        run_pipeline(
            seeds,
            &cases,
            crate::style::TechniqueKB::builtin(),
            &BTreeMap::new(),
            provider,
            &TemplateStore::builtin(),
            &config,
        )
        .unwrap()
    };

    let first = run(&seeds);
    assert_eq!(first.dialogues.len(), 6);
    for (seed, dialogue) in seeds.iter().zip(&first.dialogues) {
        assert_eq!(dialogue.id, format!("mt-{}", seed.id));
        assert!(validate_dialogue(dialogue).is_valid());
    }
    assert!(first
        .report
        .per_seed
        .iter()
        .all(|s| s.status == SeedStatus::Success));
    // Budget accounting: one style and one type call per topic, one persona
    // and one synthesis call per seed, nothing else.
    assert_eq!(
        first.report.usage.calls,
        (2 * topics.len() + 2 * seeds.len()) as u64
    );
    assert!(first.report.usage.prompt_units > 0);
    assert!(first.report.usage.completion_units > 0);

    let second = run(&seeds);
    assert_eq!(
        dialogues_to_json(&first.dialogues).unwrap(),
        dialogues_to_json(&second.dialogues).unwrap()
    );
    assert_eq!(first.report, second.report);
}

#[test]
fn pipeline_uncovered_seed_topic_aborts_before_provider_calls() {
    let seeds = vec![make_seed("s1", "uncovered")];
    let cases = vec![make_case("anxiety")];
    // An empty script: any provider call would fail with unknown-tag.
    let provider: Arc<dyn ChatProvider> = Arc::new(MockProvider::new(MockScript::default()));
    let err = run_pipeline(
        &seeds,
        &cases,
        crate::style::TechniqueKB::builtin(),
        &BTreeMap::new(),
        provider,
        &TemplateStore::builtin(),
        &SynthesisConfig::default(),
    )
    .unwrap_err();
    assert!(matches!(err, SynthError::NoStyleForTopic { topic } if topic == "uncovered"));
}

#[test]
fn pipeline_empty_seed_list_gives_empty_output() {
    let cases = vec![make_case("anxiety")];
    let provider: Arc<dyn ChatProvider> =
        Arc::new(MockProvider::new(pipeline_script(&["anxiety"], &[])));
    let output = run_pipeline(
        &[],
        &cases,
        crate::style::TechniqueKB::builtin(),
        &BTreeMap::new(),
        provider,
        &TemplateStore::builtin(),
        &SynthesisConfig::default(),
    )
    .unwrap();
    assert!(output.dialogues.is_empty());
    assert!(output.report.per_seed.is_empty());
}

#[test]
fn pipeline_collects_failures_and_conserves_counts() {
    let topics = ["anxiety"];
    let seeds = vec![make_seed("ok", "anxiety"), make_seed("bad", "anxiety")];
    let cases = vec![make_case("anxiety")];
    let mut script = pipeline_script(&topics, &seeds);
    // Seed `bad` only ever produces unparseable output.
    script.insert("synthesize:bad", vec!["still no labels".to_string()]);
    let provider: Arc<dyn ChatProvider> = Arc::new(MockProvider::new(script));
    let output = run_pipeline(
        &seeds,
        &cases,
        crate::style::TechniqueKB::builtin(),
        &BTreeMap::new(),
        provider,
        &TemplateStore::builtin(),
        &SynthesisConfig::default(),
    )
    .unwrap();
    assert_eq!(output.dialogues.len(), 1);
    assert_eq!(output.report.per_seed.len(), 2);
    let failed = &output.report.per_seed[1];
    assert_eq!(failed.attempts, 3);
    assert!(matches!(&failed.status, SeedStatus::Failed { .. }));
    // successes + failures = seeds
    let successes = output
        .report
        .per_seed
        .iter()
        .filter(|s| s.status == SeedStatus::Success)
        .count();
    assert_eq!(successes + 1, seeds.len());
}

#[test]
fn pipeline_fail_fast_returns_the_error() {
    let topics = ["anxiety"];
    let seeds = vec![make_seed("bad", "anxiety"), make_seed("ok", "anxiety")];
    let cases = vec![make_case("anxiety")];
    let mut script = pipeline_script(&topics, &seeds);
    script.insert("synthesize:bad", vec!["nope".to_string()]);
    let provider: Arc<dyn ChatProvider> = Arc::new(MockProvider::new(script));
    let config = SynthesisConfig {
        fail_fast: true,
        concurrency: 1,
        ..SynthesisConfig::default()
    };
    let err = run_pipeline(
        &seeds,
        &cases,
        crate::style::TechniqueKB::builtin(),
        &BTreeMap::new(),
        provider,
        &TemplateStore::builtin(),
        &config,
    )
    .unwrap_err();
    assert!(matches!(err, SynthError::SynthesisFailed { seed_id, .. } if seed_id == "bad"));
}

#[test]
fn pre_simulated_personas_skip_the_persona_call() {
    let seed = make_seed("s1", "anxiety");
    let mut script = MockScript::default();
    // No persona tag scripted: the call would fail if attempted.
    script.insert("synthesize:s1", vec![valid_transcript_text("s1", 4)]);
    let provider = MockProvider::new(script);
    let mut resources = resources_for(&["anxiety"]);
    resources
        .personas
        .insert("s1".to_string(), sample_persona());
    let outcome = synthesize_dialogue(
        &seed,
        &resources,
        &provider,
        &TemplateStore::builtin(),
        &SynthesisConfig::default(),
    )
    .unwrap();
    assert_eq!(outcome.attempts, 1);
}
