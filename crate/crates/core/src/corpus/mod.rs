//! Domain types, structural validation, and JSON persistence for corpus
//! artifacts.
//!
//! All types here are immutable value objects after construction and safe to
//! share across threads. Persistence is one JSON document per collection
//! (a top-level array of records); unknown record fields survive a
//! load/save round trip.

mod io;
mod types;
mod validate;

pub(crate) use io::mift_to_json_line;
pub use io::{
    cases_to_json, dialogues_to_json, load_cases, load_corpus, load_dialogues, load_mift,
    load_personas, load_ratings, load_single_turns, load_topic_registry, save_cases, save_corpus,
    save_dialogues, save_mift, save_personas, save_single_turns, Collection, CorpusKind,
};
pub use types::{
    build_transcript, normalize_topic, render_transcript, CounselingCase, CounselingTopic, JsonMap,
    LinguisticStyleProfile, MiftSample, MultiTurnDialogue, PersonalityProfile, Provenance, Role,
    School, SingleTurnDialogue, TechniqueStage, TherapeuticType, TherapyTechniqueEntry, TopicId,
    TopicRegistry, TraitLevel, TraitRating, Utterance,
};
pub use validate::{
    validate_case, validate_dialogue, validate_transcript, TranscriptKind, ValidationReport,
    Violation,
};

use thiserror::Error;

/// Errors raised by corpus construction, validation, and persistence.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("topic id is empty after normalization")]
    EmptyTopicId,

    #[error("duplicate topic `{0}` in registry")]
    DuplicateTopic(String),

    #[error("topic `{topic}` does not resolve in the topic registry")]
    UnknownTopic { topic: String },

    #[error("failed to read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },

    #[error("failed to write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },

    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },

    #[error("parse error in {path} at record {index}: {detail}")]
    ParseRecord {
        path: String,
        index: usize,
        detail: String,
    },

    #[error("invalid records in {path}:\n{}", details.join("\n"))]
    InvalidRecords { path: String, details: Vec<String> },

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}
