//! Dynamic one-shot learning from counseling cases: per-case linguistic
//! style summaries, therapeutic-type classification, and technique retrieval
//! from the knowledge base.

mod kb;

pub use kb::{normalize_type_name, TechniqueKB};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::corpus::{
    render_transcript, CounselingCase, LinguisticStyleProfile, TherapeuticType,
    TherapyTechniqueEntry, TopicId,
};
use crate::provider::{ChatProvider, ChatRequest, ProviderError, TemplateError, TemplateStore};

#[derive(Debug, Error)]
pub enum StyleError {
    #[error("knowledge base error: {0}")]
    KbParse(String),

    #[error("provider reply `{raw}` matches no known therapeutic type")]
    UnrecognizedType { raw: String },

    #[error("no technique entry for type `{name}`")]
    LookupMiss { name: String },

    #[error("cases `{first}` and `{second}` share topic `{topic}`")]
    DuplicateTopic {
        topic: String,
        first: String,
        second: String,
    },

    #[error("extraction failed for case `{case_id}`: {source}")]
    CaseFailed {
        case_id: String,
        #[source]
        source: Box<StyleError>,
    },

    #[error(transparent)]
    Provider(#[from] ProviderError),

    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// A classification with the raw provider text kept for audit.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedType {
    pub ttype: TherapeuticType,
    pub raw_reply: String,
}

/// Per-topic resources produced by [`extract_all`].
#[derive(Debug, Clone, Default)]
pub struct ExtractedResources {
    pub styles: BTreeMap<TopicId, LinguisticStyleProfile>,
    pub techniques: BTreeMap<TopicId, TherapyTechniqueEntry>,
}

/// Asks the provider to summarize the counselor's linguistic style in one
/// case. Request tag: `style:<topic>`.
pub fn summarize_linguistic_style(
    case: &CounselingCase,
    provider: &dyn ChatProvider,
    templates: &TemplateStore,
    seed: u64,
) -> Result<LinguisticStyleProfile, StyleError> {
    let template = templates.load("style_summary", None)?;
    let mut slots = BTreeMap::new();
    slots.insert("topic".to_string(), case.topic.to_string());
    slots.insert(
        "case_transcript".to_string(),
        render_transcript(&case.transcript),
    );
    let prompt = template.render(&slots)?.text;
    let tag = format!("style:{}", case.topic);
    let response = provider.complete_chat(&ChatRequest::simple(prompt, &tag, seed))?;
    let summary = response.text.trim().to_string();
    if summary.is_empty() {
        return Err(StyleError::Provider(ProviderError::Refusal { tag }));
    }
    Ok(LinguisticStyleProfile {
        topic: case.topic.clone(),
        summary,
        source_case_id: case.id.clone(),
    })
}

/// Asks the provider for the case's therapeutic type and resolves the reply
/// against the KB. Request tag: `ttype:<topic>`.
pub fn classify_therapeutic_type(
    case: &CounselingCase,
    provider: &dyn ChatProvider,
    kb: &TechniqueKB,
    templates: &TemplateStore,
    seed: u64,
) -> Result<ClassifiedType, StyleError> {
    let template = templates.load("therapeutic_type", None)?;
    let mut slots = BTreeMap::new();
    slots.insert("topic".to_string(), case.topic.to_string());
    slots.insert(
        "case_transcript".to_string(),
        render_transcript(&case.transcript),
    );
    slots.insert("known_types".to_string(), kb.type_names().join("\n"));
    let prompt = template.render(&slots)?.text;
    let tag = format!("ttype:{}", case.topic);
    let response = provider.complete_chat(&ChatRequest::simple(prompt, &tag, seed))?;
    let raw_reply = response.text;
    match kb.resolve(&raw_reply) {
        Some(entry) => Ok(ClassifiedType {
            ttype: entry.therapeutic_type.clone(),
            raw_reply,
        }),
        None => Err(StyleError::UnrecognizedType {
            raw: raw_reply.trim().to_string(),
        }),
    }
}

/// Retrieves KB entries for the given types, input order preserved,
/// deduplicated by type name (first occurrence wins).
pub fn retrieve_technique(
    types: &[TherapeuticType],
    kb: &TechniqueKB,
) -> Result<Vec<TherapyTechniqueEntry>, StyleError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut entries = Vec::new();
    for ttype in types {
        let entry = kb.lookup(ttype)?;
        if seen.insert(normalize_type_name(&entry.therapeutic_type.name)) {
            entries.push(entry.clone());
        }
    }
    Ok(entries)
}

/// Runs style summarization and technique classification over every case,
/// producing exactly one style profile and one technique entry per topic.
/// The first per-case failure aborts with the failing case id.
pub fn extract_all(
    cases: &[CounselingCase],
    provider: &dyn ChatProvider,
    kb: &TechniqueKB,
    templates: &TemplateStore,
    seed: u64,
) -> Result<ExtractedResources, StyleError> {
    // Topic uniqueness first, before any provider call.
    let mut owners: BTreeMap<&TopicId, &str> = BTreeMap::new();
    for case in cases {
        if let Some(first) = owners.insert(&case.topic, &case.id) {
            return Err(StyleError::DuplicateTopic {
                topic: case.topic.to_string(),
                first: first.to_string(),
                second: case.id.clone(),
            });
        }
    }

    let mut resources = ExtractedResources::default();
    for case in cases {
        let wrap = |source: StyleError| StyleError::CaseFailed {
            case_id: case.id.clone(),
            source: Box::new(source),
        };
        let style = summarize_linguistic_style(case, provider, templates, seed).map_err(wrap)?;
        let classified =
            classify_therapeutic_type(case, provider, kb, templates, seed).map_err(wrap)?;
        let entry = kb.lookup(&classified.ttype).map_err(wrap)?;
        resources.styles.insert(case.topic.clone(), style);
        resources
            .techniques
            .insert(case.topic.clone(), entry.clone());
    }
    Ok(resources)
}
