//! Multi-turn dialogue synthesis: topic-matched resources, polymerized
//! prompt construction, provider calls, transcript parsing, and
//! validation-driven retries.

mod transcript;

pub use transcript::{parse_transcript, LabelLexicon, TranscriptError};

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{
    render_transcript, validate_transcript, CorpusError, CounselingCase, LinguisticStyleProfile,
    MultiTurnDialogue, PersonalityProfile, Provenance, School, SingleTurnDialogue, TechniqueStage,
    TherapeuticType, TherapyTechniqueEntry, TopicId, TranscriptKind,
};
use crate::persona::{neutral_profile, simulate_personality, PersonaError};
use crate::provider::{
    ChatMessage, ChatProvider, ChatRequest, DecodingConfig, MeteredProvider, ProviderError,
    TemplateError, TemplateStore, UsageTotals,
};
use crate::style::{extract_all, StyleError, TechniqueKB};
use crate::util::{hash64, sha256_hex};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("no linguistic style for topic `{topic}`")]
    NoStyleForTopic { topic: String },

    #[error("no therapy technique for topic `{topic}`")]
    NoTechniqueForTopic { topic: String },

    #[error("no exemplar case for topic `{topic}`")]
    NoExemplarForTopic { topic: String },

    #[error("synthesis context topics disagree: {detail}")]
    TopicMismatch { detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("synthesis failed for seed `{seed_id}` after {} attempts:\n{}", attempts.len(), format_attempts(attempts))]
    SynthesisFailed {
        seed_id: String,
        attempts: Vec<AttemptFailure>,
    },

    #[error(transparent)]
    Style(#[from] StyleError),

    #[error(transparent)]
    Persona(#[from] PersonaError),

    #[error(transparent)]
    Provider(#[from] ProviderError),

    #[error(transparent)]
    Template(#[from] TemplateError),

    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// One rejected synthesis attempt and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttemptFailure {
    pub attempt: u32,
    pub report: String,
}

fn format_attempts(attempts: &[AttemptFailure]) -> String {
    attempts
        .iter()
        .map(|a| format!("attempt {}: {}", a.attempt, a.report))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Placeholder style summary substituted when the style component is ablated.
pub const NEUTRAL_STYLE_SUMMARY: &str =
    "No specific linguistic style is prescribed; write in plain, neutral counselor language.";

/// Placeholder technique description substituted when the technique
/// component is ablated.
pub const NEUTRAL_TECHNIQUE_DESCRIPTION: &str =
    "No specific therapy technique is prescribed; respond with general supportive counseling.";

/// Placeholder technique entry used by [`ablate_context`].
pub fn neutral_technique() -> TherapyTechniqueEntry {
    TherapyTechniqueEntry {
        therapeutic_type: TherapeuticType {
            name: "Unspecified".to_string(),
            school: School::Other,
        },
        description: NEUTRAL_TECHNIQUE_DESCRIPTION.to_string(),
        stages: Vec::new(),
    }
}

/// Which context component an ablation removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationTarget {
    Style,
    Technique,
    Persona,
}

impl std::str::FromStr for AblationTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "style" => Ok(AblationTarget::Style),
            "technique" => Ok(AblationTarget::Technique),
            "persona" => Ok(AblationTarget::Persona),
            other => Err(format!(
                "unknown ablation target `{other}` (expected style, technique, or persona)"
            )),
        }
    }
}

/// The polymerized bundle fed to the synthesis prompt. Construction fails
/// unless the exemplar case, style profile, technique owner, and seed
/// dialogue all agree on the topic, so the pipeline can never pair a seed
/// with another topic's resources.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisContext {
    exemplar_case: CounselingCase,
    style: LinguisticStyleProfile,
    technique: TherapyTechniqueEntry,
    technique_topic: TopicId,
    persona: PersonalityProfile,
    seed_dialogue: SingleTurnDialogue,
    emotion_guide: String,
    response_guide: String,
}

impl SynthesisContext {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        exemplar_case: CounselingCase,
        style: LinguisticStyleProfile,
        technique: TherapyTechniqueEntry,
        technique_topic: TopicId,
        persona: PersonalityProfile,
        seed_dialogue: SingleTurnDialogue,
        emotion_guide: impl Into<String>,
        response_guide: impl Into<String>,
    ) -> Result<Self, SynthError> {
        let reference = &seed_dialogue.topic;
        let mut mismatches = Vec::new();
        if &exemplar_case.topic != reference {
            mismatches.push(format!(
                "exemplar case `{}` is on `{}`",
                exemplar_case.id, exemplar_case.topic
            ));
        }
        if &style.topic != reference {
            mismatches.push(format!("style profile is on `{}`", style.topic));
        }
        if &technique_topic != reference {
            mismatches.push(format!("technique is owned by `{technique_topic}`"));
        }
        if !mismatches.is_empty() {
            return Err(SynthError::TopicMismatch {
                detail: format!(
                    "seed `{}` is on `{reference}` but {}",
                    seed_dialogue.id,
                    mismatches.join(", ")
                ),
            });
        }
        Ok(SynthesisContext {
            exemplar_case,
            style,
            technique,
            technique_topic,
            persona,
            seed_dialogue,
            emotion_guide: emotion_guide.into(),
            response_guide: response_guide.into(),
        })
    }

    pub fn topic(&self) -> &TopicId {
        &self.seed_dialogue.topic
    }

    pub fn exemplar_case(&self) -> &CounselingCase {
        &self.exemplar_case
    }

    pub fn style(&self) -> &LinguisticStyleProfile {
        &self.style
    }

    pub fn technique(&self) -> &TherapyTechniqueEntry {
        &self.technique
    }

    pub fn persona(&self) -> &PersonalityProfile {
        &self.persona
    }

    pub fn seed_dialogue(&self) -> &SingleTurnDialogue {
        &self.seed_dialogue
    }

    pub fn emotion_guide(&self) -> &str {
        &self.emotion_guide
    }

    pub fn response_guide(&self) -> &str {
        &self.response_guide
    }
}

/// Returns the context with one component replaced by its documented
/// neutral placeholder. Idempotent: dropping the same component twice gives
/// the same context as dropping it once.
pub fn ablate_context(ctx: &SynthesisContext, drop: AblationTarget) -> SynthesisContext {
    let mut ablated = ctx.clone();
    match drop {
        AblationTarget::Style => {
            ablated.style.summary = NEUTRAL_STYLE_SUMMARY.to_string();
        }
        AblationTarget::Technique => {
            ablated.technique = neutral_technique();
        }
        AblationTarget::Persona => {
            ablated.persona = neutral_profile();
        }
    }
    ablated
}

/// Exact match on the normalized topic id.
pub fn match_style<'a>(
    topic: &str,
    styles: &'a BTreeMap<TopicId, LinguisticStyleProfile>,
) -> Result<&'a LinguisticStyleProfile, SynthError> {
    let missing = || SynthError::NoStyleForTopic {
        topic: topic.trim().to_string(),
    };
    let id = TopicId::new(topic).map_err(|_| missing())?;
    styles.get(&id).ok_or_else(missing)
}

/// Exact match on the normalized topic id.
pub fn match_technique<'a>(
    topic: &str,
    techniques: &'a BTreeMap<TopicId, TherapyTechniqueEntry>,
) -> Result<&'a TherapyTechniqueEntry, SynthError> {
    let missing = || SynthError::NoTechniqueForTopic {
        topic: topic.trim().to_string(),
    };
    let id = TopicId::new(topic).map_err(|_| missing())?;
    techniques.get(&id).ok_or_else(missing)
}

/// Everything synthesis needs, keyed by topic (plus optional pre-simulated
/// personas keyed by seed id).
#[derive(Debug, Clone, Default)]
pub struct SynthesisResources {
    pub exemplars: BTreeMap<TopicId, CounselingCase>,
    pub styles: BTreeMap<TopicId, LinguisticStyleProfile>,
    pub techniques: BTreeMap<TopicId, TherapyTechniqueEntry>,
    pub personas: BTreeMap<String, PersonalityProfile>,
}

/// Pipeline configuration. The defaults match the documented conventions:
/// global seed 42, three synthesis attempts, four-utterance minimum, and
/// concurrency 4.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisConfig {
    pub global_seed: u64,
    /// Total synthesis attempts per seed (first try included).
    pub retry_budget: u32,
    /// Total attempts for persona simulation per seed.
    pub persona_attempt_cap: u32,
    /// Minimum utterance count for synthetic output.
    pub min_length: usize,
    /// Hint rendered into the prompt; no hard turn count is enforced.
    pub turn_range_hint: String,
    /// When set, empty emotion/response guides are a missing-slot error.
    pub strict_guides: bool,
    pub emotion_guide: String,
    pub response_guide: String,
    /// Pinned template version; `None` selects the newest available.
    pub template_version: Option<String>,
    pub decoding: DecodingConfig,
    pub concurrency: usize,
    pub fail_fast: bool,
}

/// Default emotion guide. A stand-in: replace it with counselor-specific
/// guidance via configuration for production corpora.
pub const DEFAULT_EMOTION_GUIDE: &str = "The client starts the conversation under visible \
    distress and eases gradually toward calm and mild hopefulness as the counselor works; \
    emotional change is gradual, never an abrupt jump between adjacent messages.";

/// Default response guide. A stand-in, like the emotion guide.
pub const DEFAULT_RESPONSE_GUIDE: &str = "Counselor messages stay short and conversational, \
    usually one to three sentences, favoring questions, reflections, and gentle guidance \
    over lectures; exactly one counselor message answers each client message.";

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            global_seed: 42,
            retry_budget: 3,
            persona_attempt_cap: 2,
            min_length: 4,
            turn_range_hint: "16 to 24".to_string(),
            strict_guides: true,
            emotion_guide: DEFAULT_EMOTION_GUIDE.to_string(),
            response_guide: DEFAULT_RESPONSE_GUIDE.to_string(),
            template_version: None,
            decoding: DecodingConfig::default(),
            concurrency: 4,
            fail_fast: false,
        }
    }
}

impl SynthesisConfig {
    fn check(&self) -> Result<(), SynthError> {
        if self.retry_budget < 1 {
            return Err(SynthError::Config("retry_budget must be >= 1".to_string()));
        }
        if self.persona_attempt_cap < 1 {
            return Err(SynthError::Config(
                "persona_attempt_cap must be >= 1".to_string(),
            ));
        }
        if self.concurrency < 1 {
            return Err(SynthError::Config("concurrency must be >= 1".to_string()));
        }
        self.decoding
            .check()
            .map_err(|e| SynthError::Config(e.to_string()))?;
        Ok(())
    }

    /// Digest over the resolved configuration, recorded in run reports.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        sha256_hex(canonical.as_bytes())
    }
}

fn render_technique(entry: &TherapyTechniqueEntry) -> String {
    let mut text = format!(
        "{} ({} school)\n{}",
        entry.therapeutic_type.name, entry.therapeutic_type.school, entry.description
    );
    if !entry.stages.is_empty() {
        text.push_str("\nStages:");
        for (number, TechniqueStage { title, guidance }) in entry.stages.iter().enumerate() {
            text.push_str(&format!("\n{}. {title}: {guidance}", number + 1));
        }
    }
    text
}

fn render_persona(profile: &PersonalityProfile) -> String {
    profile
        .dimensions()
        .iter()
        .map(|(name, rating)| format!("- {name}: {} ({})", rating.level, rating.rationale))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Renders the synthesis prompt from the context. Deterministic given the
/// context, template, and config.
pub fn build_synthesis_prompt(
    ctx: &SynthesisContext,
    template: &crate::provider::PromptTemplate,
    config: &SynthesisConfig,
) -> Result<String, SynthError> {
    if config.strict_guides {
        for (slot, value) in [
            ("emotion_guide", ctx.emotion_guide()),
            ("response_guide", ctx.response_guide()),
        ] {
            if value.trim().is_empty() {
                return Err(SynthError::Template(TemplateError::MissingSlot {
                    slot: slot.to_string(),
                }));
            }
        }
    }
    let mut slots = BTreeMap::new();
    slots.insert("topic".to_string(), ctx.topic().to_string());
    slots.insert(
        "exemplar_case".to_string(),
        render_transcript(&ctx.exemplar_case().transcript),
    );
    slots.insert("linguistic_style".to_string(), ctx.style().summary.clone());
    slots.insert(
        "therapy_technique".to_string(),
        render_technique(ctx.technique()),
    );
    slots.insert(
        "client_personality".to_string(),
        render_persona(ctx.persona()),
    );
    slots.insert("seed_title".to_string(), ctx.seed_dialogue().title.clone());
    slots.insert(
        "seed_detail".to_string(),
        ctx.seed_dialogue().detail.clone(),
    );
    slots.insert(
        "seed_response".to_string(),
        ctx.seed_dialogue().counselor_response.clone(),
    );
    slots.insert("emotion_guide".to_string(), ctx.emotion_guide().to_string());
    slots.insert(
        "response_guide".to_string(),
        ctx.response_guide().to_string(),
    );
    slots.insert(
        "turn_range_hint".to_string(),
        config.turn_range_hint.clone(),
    );
    Ok(template.render(&slots)?.text)
}

/// A successful synthesis and how many attempts it took.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOutcome {
    pub dialogue: MultiTurnDialogue,
    pub attempts: u32,
}

/// Per-seed RNG seed: a stable mix of the global seed and the seed id, so
/// runs are reproducible regardless of scheduling order.
pub fn per_seed_rng(global_seed: u64, seed_id: &str) -> u64 {
    hash64(&[&global_seed.to_le_bytes(), seed_id.as_bytes()])
}

/// Synthesizes one multi-turn dialogue from one seed.
///
/// The provider is re-asked with the violation report appended whenever the
/// reply fails transcript parsing or structural validation, up to the retry
/// budget. Request tag: `synthesize:<seed id>`.
pub fn synthesize_dialogue(
    seed: &SingleTurnDialogue,
    resources: &SynthesisResources,
    provider: &dyn ChatProvider,
    templates: &TemplateStore,
    config: &SynthesisConfig,
) -> Result<SynthesisOutcome, SynthError> {
    let style = match_style(seed.topic.as_str(), &resources.styles)?;
    let technique = match_technique(seed.topic.as_str(), &resources.techniques)?;
    let exemplar =
        resources
            .exemplars
            .get(&seed.topic)
            .ok_or_else(|| SynthError::NoExemplarForTopic {
                topic: seed.topic.to_string(),
            })?;
    let seedval = per_seed_rng(config.global_seed, &seed.id);
    let persona = match resources.personas.get(&seed.id) {
        Some(profile) => profile.clone(),
        None => {
            simulate_personality(
                seed,
                provider,
                templates,
                seedval,
                config.persona_attempt_cap,
            )?
            .profile
        }
    };

    let ctx = SynthesisContext::new(
        exemplar.clone(),
        style.clone(),
        technique.clone(),
        seed.topic.clone(),
        persona,
        seed.clone(),
        config.emotion_guide.clone(),
        config.response_guide.clone(),
    )?;
    let template = templates.load("synthesis", config.template_version.as_deref())?;
    let prompt = build_synthesis_prompt(&ctx, &template, config)?;

    let lexicon = LabelLexicon::default();
    let tag = format!("synthesize:{}", seed.id);
    let mut failures: Vec<AttemptFailure> = Vec::new();

    for attempt in 1..=config.retry_budget {
        let text = if failures.is_empty() {
            prompt.clone()
        } else {
            format!(
                "{prompt}\n\nYour previous reply was rejected for these problems:\n{}\nRewrite the complete dialogue and fix every problem.",
                failures.last().expect("non-empty").report
            )
        };
        let request = ChatRequest::new(
            vec![ChatMessage::user(text)],
            config.decoding.clone(),
            &tag,
            seedval,
        )?;
        let response = provider.complete_chat(&request)?;

        let transcript = match parse_transcript(&response.text, &lexicon) {
            Ok(transcript) => transcript,
            Err(parse_error) => {
                failures.push(AttemptFailure {
                    attempt,
                    report: parse_error.to_string(),
                });
                continue;
            }
        };
        let report = validate_transcript(&transcript, TranscriptKind::Synthetic, config.min_length);
        if report.is_valid() {
            let dialogue = MultiTurnDialogue {
                id: format!("mt-{}", seed.id),
                topic: seed.topic.clone(),
                transcript,
                provenance: Some(Provenance {
                    source_single_turn_id: seed.id.clone(),
                    provider_model_id: response.provider_model_id,
                    seed: seedval,
                    template_version: template.version_label(),
                }),
                extra: crate::corpus::JsonMap::new(),
            };
            return Ok(SynthesisOutcome {
                dialogue,
                attempts: attempt,
            });
        }
        failures.push(AttemptFailure {
            attempt,
            report: report.to_string(),
        });
    }

    Err(SynthError::SynthesisFailed {
        seed_id: seed.id.clone(),
        attempts: failures,
    })
}

/// Outcome status for one seed in the run report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SeedStatus {
    Success,
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedReport {
    pub id: String,
    #[serde(flatten)]
    pub status: SeedStatus,
    pub attempts: u32,
}

/// Machine-readable report for one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub per_seed: Vec<SeedReport>,
    pub usage: UsageTotals,
    pub config_digest: String,
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub dialogues: Vec<MultiTurnDialogue>,
    pub report: RunReport,
}

/// Runs the full synthesis pipeline: extract per-topic resources from the
/// cases, then synthesize every seed under a bounded worker pool.
///
/// Configuration problems (duplicate case topics, uncovered seed topics,
/// missing templates) abort before any provider call. Per-seed failures are
/// collected in the report unless `fail_fast` is set.
pub fn run_pipeline(
    seeds: &[SingleTurnDialogue],
    cases: &[CounselingCase],
    kb: &TechniqueKB,
    personas: &BTreeMap<String, PersonalityProfile>,
    provider: std::sync::Arc<dyn ChatProvider>,
    templates: &TemplateStore,
    config: &SynthesisConfig,
) -> Result<PipelineOutput, SynthError> {
    config.check()?;

    // Pre-flight, before any provider call.
    let mut case_topics: BTreeMap<&TopicId, &str> = BTreeMap::new();
    for case in cases {
        if let Some(first) = case_topics.insert(&case.topic, &case.id) {
            return Err(SynthError::Style(StyleError::DuplicateTopic {
                topic: case.topic.to_string(),
                first: first.to_string(),
                second: case.id.clone(),
            }));
        }
    }
    for seed in seeds {
        if !case_topics.contains_key(&seed.topic) {
            return Err(SynthError::NoStyleForTopic {
                topic: seed.topic.to_string(),
            });
        }
    }
    templates.load("synthesis", config.template_version.as_deref())?;
    templates.load("persona", None)?;

    let metered = MeteredProvider::new(provider);
    let meter = metered.meter();

    let extracted = extract_all(cases, &metered, kb, templates, config.global_seed)?;
    let resources = SynthesisResources {
        exemplars: cases
            .iter()
            .map(|case| (case.topic.clone(), case.clone()))
            .collect(),
        styles: extracted.styles,
        techniques: extracted.techniques,
        personas: personas.clone(),
    };

    let results: Vec<Mutex<Option<Result<SynthesisOutcome, SynthError>>>> =
        seeds.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let worker_count = config.concurrency.min(seeds.len()).max(1);
    let resources_ref = &resources;
    let metered_ref = &metered;
    let results_ref = &results;
    let next_ref = &next;
    let abort_ref = &abort;

    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            scope.spawn(move || loop {
                if abort_ref.load(Ordering::SeqCst) {
                    break;
                }
                let index = next_ref.fetch_add(1, Ordering::SeqCst);
                if index >= seeds.len() {
                    break;
                }
                let outcome = synthesize_dialogue(
                    &seeds[index],
                    resources_ref,
                    metered_ref,
                    templates,
                    config,
                );
                if outcome.is_err() && config.fail_fast {
                    abort_ref.store(true, Ordering::SeqCst);
                }
                *results_ref[index].lock().expect("result slot") = Some(outcome);
            });
        }
    });

    let mut dialogues = Vec::new();
    let mut per_seed = Vec::with_capacity(seeds.len());
    for (seed, slot) in seeds.iter().zip(results) {
        let outcome = slot.into_inner().expect("result lock");
        match outcome {
            Some(Ok(outcome)) => {
                per_seed.push(SeedReport {
                    id: seed.id.clone(),
                    status: SeedStatus::Success,
                    attempts: outcome.attempts,
                });
                dialogues.push(outcome.dialogue);
            }
            Some(Err(err)) => {
                if config.fail_fast {
                    return Err(err);
                }
                let attempts = match &err {
                    SynthError::SynthesisFailed { attempts, .. } => attempts.len() as u32,
                    _ => 0,
                };
                per_seed.push(SeedReport {
                    id: seed.id.clone(),
                    status: SeedStatus::Failed {
                        error: err.to_string(),
                    },
                    attempts,
                });
            }
            // Only reachable when fail-fast aborted remaining work.
            None => {
                per_seed.push(SeedReport {
                    id: seed.id.clone(),
                    status: SeedStatus::Failed {
                        error: "skipped: run aborted by fail-fast".to_string(),
                    },
                    attempts: 0,
                });
            }
        }
    }

    Ok(PipelineOutput {
        dialogues,
        report: RunReport {
            per_seed,
            usage: meter.totals(),
            config_digest: config.digest(),
        },
    })
}

#[cfg(test)]
mod tests;
