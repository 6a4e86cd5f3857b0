//! JSON persistence for corpus collections.
//!
//! Canonical form is one JSON document per collection: a top-level array of
//! records. MIFT files may also be line-delimited (one record per line); the
//! loader detects which form it is reading. Records failing type invariants
//! are rejected with their index and id.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::types::{
    CounselingCase, CounselingTopic, JsonMap, MiftSample, MultiTurnDialogue, PersonalityProfile,
    Provenance, Role, SingleTurnDialogue, TopicId, TopicRegistry, Utterance,
};
use super::validate::{validate_transcript, TranscriptKind};
use super::CorpusError;
use crate::eval::RatingMatrix;

/// Collection kinds understood by [`load_corpus`] / [`save_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    SingleTurn,
    Case,
    MultiTurn,
    Mift,
    Ratings,
}

impl FromStr for CorpusKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single_turn" => Ok(CorpusKind::SingleTurn),
            "case" => Ok(CorpusKind::Case),
            "multi_turn" => Ok(CorpusKind::MultiTurn),
            "mift" => Ok(CorpusKind::Mift),
            "ratings" => Ok(CorpusKind::Ratings),
            other => Err(format!(
                "unknown corpus kind `{other}` (expected single_turn, case, multi_turn, mift, or ratings)"
            )),
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CorpusKind::SingleTurn => "single_turn",
            CorpusKind::Case => "case",
            CorpusKind::MultiTurn => "multi_turn",
            CorpusKind::Mift => "mift",
            CorpusKind::Ratings => "ratings",
        };
        f.write_str(s)
    }
}

/// A typed collection loaded from disk.
#[derive(Debug, Clone)]
pub enum Collection {
    SingleTurn(Vec<SingleTurnDialogue>),
    Cases(Vec<CounselingCase>),
    MultiTurn(Vec<MultiTurnDialogue>),
    Mift(Vec<MiftSample>),
    Ratings(RatingMatrix),
}

impl Collection {
    pub fn len(&self) -> usize {
        match self {
            Collection::SingleTurn(v) => v.len(),
            Collection::Cases(v) => v.len(),
            Collection::MultiTurn(v) => v.len(),
            Collection::Mift(v) => v.len(),
            Collection::Ratings(m) => m.item_count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

// ---------------------------------------------------------------------------
// Wire records
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MessageRecord {
    role: Role,
    content: String,
}

#[derive(Serialize, Deserialize)]
struct SingleTurnRecord {
    id: String,
    topic: TopicId,
    title: String,
    detail: String,
    counselor_response: String,
    #[serde(flatten)]
    extra: JsonMap,
}

#[derive(Serialize, Deserialize)]
struct TranscriptRecord {
    id: String,
    topic: TopicId,
    messages: Vec<MessageRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
    #[serde(default, skip_serializing_if = "is_false")]
    sanitized: bool,
    #[serde(flatten)]
    extra: JsonMap,
}

#[derive(Serialize, Deserialize)]
struct MiftRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    system: Option<String>,
    context: Vec<MessageRecord>,
    target: String,
    source_dialogue_id: String,
    turn_index: usize,
    #[serde(flatten)]
    extra: JsonMap,
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn messages_to_transcript(messages: Vec<MessageRecord>) -> Vec<Utterance> {
    messages
        .into_iter()
        .enumerate()
        .map(|(index, m)| Utterance {
            role: m.role,
            content: m.content,
            index,
        })
        .collect()
}

fn transcript_to_messages(transcript: &[Utterance]) -> Vec<MessageRecord> {
    transcript
        .iter()
        .map(|u| MessageRecord {
            role: u.role,
            content: u.content.clone(),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Generic array parsing with per-record locations
// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, content: &str) -> Result<(), CorpusError> {
    std::fs::write(path, content).map_err(|source| CorpusError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn parse_array(path: &Path, text: &str) -> Result<Vec<Value>, CorpusError> {
    serde_json::from_str::<Vec<Value>>(text).map_err(|e| CorpusError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn parse_records<R: for<'de> Deserialize<'de>>(
    path: &Path,
    values: Vec<Value>,
) -> Result<Vec<R>, CorpusError> {
    values
        .into_iter()
        .enumerate()
        .map(|(index, value)| {
            serde_json::from_value::<R>(value).map_err(|e| CorpusError::ParseRecord {
                path: path.display().to_string(),
                index,
                detail: e.to_string(),
            })
        })
        .collect()
}

fn reject_invalid(path: &Path, details: Vec<String>) -> Result<(), CorpusError> {
    if details.is_empty() {
        Ok(())
    } else {
        Err(CorpusError::InvalidRecords {
            path: path.display().to_string(),
            details,
        })
    }
}

// ---------------------------------------------------------------------------
// Single-turn dialogues
// ---------------------------------------------------------------------------

pub fn load_single_turns(path: &Path) -> Result<Vec<SingleTurnDialogue>, CorpusError> {
    let records: Vec<SingleTurnRecord> =
        parse_records(path, parse_array(path, &read_file(path)?)?)?;
    let mut out = Vec::with_capacity(records.len());
    let mut problems = Vec::new();
    for (index, r) in records.into_iter().enumerate() {
        for (field, value) in [
            ("id", &r.id),
            ("title", &r.title),
            ("detail", &r.detail),
            ("counselor_response", &r.counselor_response),
        ] {
            if value.trim().is_empty() {
                problems.push(format!("record {index} (`{}`): empty {field}", r.id));
            }
        }
        out.push(SingleTurnDialogue {
            id: r.id,
            topic: r.topic,
            title: r.title,
            detail: r.detail,
            counselor_response: r.counselor_response,
            extra: r.extra,
        });
    }
    reject_invalid(path, problems)?;
    Ok(out)
}

pub fn save_single_turns(dialogues: &[SingleTurnDialogue], path: &Path) -> Result<(), CorpusError> {
    let records: Vec<SingleTurnRecord> = dialogues
        .iter()
        .map(|d| SingleTurnRecord {
            id: d.id.clone(),
            topic: d.topic.clone(),
            title: d.title.clone(),
            detail: d.detail.clone(),
            counselor_response: d.counselor_response.clone(),
            extra: d.extra.clone(),
        })
        .collect();
    write_file(path, &to_pretty_json(&records)?)
}

// ---------------------------------------------------------------------------
// Counseling cases
// ---------------------------------------------------------------------------

pub fn load_cases(path: &Path) -> Result<Vec<CounselingCase>, CorpusError> {
    let records: Vec<TranscriptRecord> =
        parse_records(path, parse_array(path, &read_file(path)?)?)?;
    let mut out = Vec::with_capacity(records.len());
    let mut problems = Vec::new();
    for (index, r) in records.into_iter().enumerate() {
        let transcript = messages_to_transcript(r.messages);
        let report = validate_transcript(&transcript, TranscriptKind::Case, 2);
        if !report.is_valid() {
            problems.push(format!("record {index} (`{}`): {report}", r.id));
        }
        out.push(CounselingCase {
            id: r.id,
            topic: r.topic,
            transcript,
            sanitized: r.sanitized,
            extra: r.extra,
        });
    }
    reject_invalid(path, problems)?;
    Ok(out)
}

pub fn cases_to_json(cases: &[CounselingCase]) -> Result<String, CorpusError> {
    let records: Vec<TranscriptRecord> = cases
        .iter()
        .map(|c| TranscriptRecord {
            id: c.id.clone(),
            topic: c.topic.clone(),
            messages: transcript_to_messages(&c.transcript),
            provenance: None,
            sanitized: c.sanitized,
            extra: c.extra.clone(),
        })
        .collect();
    to_pretty_json(&records)
}

pub fn save_cases(cases: &[CounselingCase], path: &Path) -> Result<(), CorpusError> {
    write_file(path, &cases_to_json(cases)?)
}

// ---------------------------------------------------------------------------
// Multi-turn dialogues
// ---------------------------------------------------------------------------

pub fn load_dialogues(path: &Path) -> Result<Vec<MultiTurnDialogue>, CorpusError> {
    let records: Vec<TranscriptRecord> =
        parse_records(path, parse_array(path, &read_file(path)?)?)?;
    let mut out = Vec::with_capacity(records.len());
    let mut problems = Vec::new();
    for (index, r) in records.into_iter().enumerate() {
        let transcript = messages_to_transcript(r.messages);
        let report = validate_transcript(&transcript, TranscriptKind::Synthetic, 2);
        if !report.is_valid() {
            problems.push(format!("record {index} (`{}`): {report}", r.id));
        }
        out.push(MultiTurnDialogue {
            id: r.id,
            topic: r.topic,
            transcript,
            provenance: r.provenance,
            extra: r.extra,
        });
    }
    reject_invalid(path, problems)?;
    Ok(out)
}

/// Serializes dialogues to the canonical collection document.
pub fn dialogues_to_json(dialogues: &[MultiTurnDialogue]) -> Result<String, CorpusError> {
    let records: Vec<TranscriptRecord> = dialogues
        .iter()
        .map(|d| TranscriptRecord {
            id: d.id.clone(),
            topic: d.topic.clone(),
            messages: transcript_to_messages(&d.transcript),
            provenance: d.provenance.clone(),
            sanitized: false,
            extra: d.extra.clone(),
        })
        .collect();
    to_pretty_json(&records)
}

pub fn save_dialogues(dialogues: &[MultiTurnDialogue], path: &Path) -> Result<(), CorpusError> {
    write_file(path, &dialogues_to_json(dialogues)?)
}

// ---------------------------------------------------------------------------
// MIFT samples
// ---------------------------------------------------------------------------

fn check_mift(sample: &MiftSample) -> Result<(), String> {
    if sample.target.trim().is_empty() {
        return Err("empty target".to_string());
    }
    if sample.context.is_empty() {
        return Err("empty context".to_string());
    }
    if sample.context.len() != sample.turn_index {
        return Err(format!(
            "context length {} does not equal turn_index {}",
            sample.context.len(),
            sample.turn_index
        ));
    }
    let report = validate_transcript(&sample.context, TranscriptKind::Case, 1);
    if !report.is_valid() {
        return Err(report.to_string());
    }
    match sample.context.last() {
        Some(last) if last.role == Role::Client => Ok(()),
        _ => Err("context must end with a client utterance".to_string()),
    }
}

pub fn load_mift(path: &Path) -> Result<Vec<MiftSample>, CorpusError> {
    let text = read_file(path)?;
    let trimmed = text.trim_start();
    let records: Vec<MiftRecord> = if trimmed.starts_with('[') {
        parse_records(path, parse_array(path, &text)?)?
    } else {
        // Line-delimited form: one record per non-blank line.
        let mut records = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record =
                serde_json::from_str::<MiftRecord>(line).map_err(|e| CorpusError::ParseRecord {
                    path: path.display().to_string(),
                    index: line_no,
                    detail: e.to_string(),
                })?;
            records.push(record);
        }
        records
    };

    let mut out = Vec::with_capacity(records.len());
    let mut problems = Vec::new();
    for (index, r) in records.into_iter().enumerate() {
        let sample = MiftSample {
            context: messages_to_transcript(r.context),
            target: r.target,
            source_dialogue_id: r.source_dialogue_id,
            turn_index: r.turn_index,
            system: r.system,
            extra: r.extra,
        };
        if let Err(detail) = check_mift(&sample) {
            problems.push(format!(
                "record {index} (`{}`): {detail}",
                sample.source_dialogue_id
            ));
        }
        out.push(sample);
    }
    reject_invalid(path, problems)?;
    Ok(out)
}

fn mift_to_record(sample: &MiftSample) -> MiftRecord {
    MiftRecord {
        system: sample.system.clone(),
        context: transcript_to_messages(&sample.context),
        target: sample.target.clone(),
        source_dialogue_id: sample.source_dialogue_id.clone(),
        turn_index: sample.turn_index,
        extra: sample.extra.clone(),
    }
}

/// Serializes one MIFT sample as a single compact JSON line.
pub(crate) fn mift_to_json_line(sample: &MiftSample) -> Result<String, CorpusError> {
    Ok(serde_json::to_string(&mift_to_record(sample))?)
}

pub fn save_mift(samples: &[MiftSample], path: &Path) -> Result<(), CorpusError> {
    let records: Vec<MiftRecord> = samples.iter().map(mift_to_record).collect();
    write_file(path, &to_pretty_json(&records)?)
}

// ---------------------------------------------------------------------------
// Ratings, personas, topic registry
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct RatingItemRecord {
    #[serde(default)]
    #[allow(dead_code)]
    id: Option<String>,
    counts: Vec<u32>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RatingsFile {
    Bare(Vec<Vec<u32>>),
    Items { items: Vec<RatingItemRecord> },
}

/// Loads a rating matrix from either a bare array of count rows or an
/// `{"items": [{"id", "counts"}]}` document.
pub fn load_ratings(path: &Path) -> Result<RatingMatrix, CorpusError> {
    let text = read_file(path)?;
    let file: RatingsFile = serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let rows = match file {
        RatingsFile::Bare(rows) => rows,
        RatingsFile::Items { items } => items.into_iter().map(|i| i.counts).collect(),
    };
    RatingMatrix::new(rows).map_err(|e| CorpusError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

/// Loads a personas file: a map from single-turn dialogue id to profile.
pub fn load_personas(path: &Path) -> Result<BTreeMap<String, PersonalityProfile>, CorpusError> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

pub fn save_personas(
    personas: &BTreeMap<String, PersonalityProfile>,
    path: &Path,
) -> Result<(), CorpusError> {
    write_file(path, &to_pretty_json(personas)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TopicEntry {
    Name(String),
    Full { id: String, display_name: String },
}

/// Loads a topic registry from an array of names or
/// `{"id", "display_name"}` objects.
pub fn load_topic_registry(path: &Path) -> Result<TopicRegistry, CorpusError> {
    let text = read_file(path)?;
    let entries: Vec<TopicEntry> = serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let topics = entries
        .into_iter()
        .map(|entry| {
            let (raw, display) = match entry {
                TopicEntry::Name(name) => (name.clone(), name),
                TopicEntry::Full { id, display_name } => (id, display_name),
            };
            Ok(CounselingTopic {
                id: TopicId::new(&raw)?,
                display_name: display,
            })
        })
        .collect::<Result<Vec<_>, CorpusError>>()?;
    TopicRegistry::new(topics)
}

// ---------------------------------------------------------------------------
// Kind-dispatched entry points
// ---------------------------------------------------------------------------

pub fn load_corpus(path: &Path, kind: CorpusKind) -> Result<Collection, CorpusError> {
    match kind {
        CorpusKind::SingleTurn => Ok(Collection::SingleTurn(load_single_turns(path)?)),
        CorpusKind::Case => Ok(Collection::Cases(load_cases(path)?)),
        CorpusKind::MultiTurn => Ok(Collection::MultiTurn(load_dialogues(path)?)),
        CorpusKind::Mift => Ok(Collection::Mift(load_mift(path)?)),
        CorpusKind::Ratings => Ok(Collection::Ratings(load_ratings(path)?)),
    }
}

pub fn save_corpus(collection: &Collection, path: &Path) -> Result<(), CorpusError> {
    match collection {
        Collection::SingleTurn(v) => save_single_turns(v, path),
        Collection::Cases(v) => save_cases(v, path),
        Collection::MultiTurn(v) => save_dialogues(v, path),
        Collection::Mift(v) => save_mift(v, path),
        Collection::Ratings(m) => write_file(path, &to_pretty_json(&m.rows())?),
    }
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String, CorpusError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::types::build_transcript;
    use proptest::prelude::*;

    fn topic(raw: &str) -> TopicId {
        TopicId::new(raw).unwrap()
    }

    fn sample_dialogue(id: &str, len: usize) -> MultiTurnDialogue {
        let roles = (0..len).map(|i| {
            let role = if i % 2 == 0 {
                Role::Client
            } else {
                Role::Counselor
            };
            (role, format!("{id} message {i}"))
        });
        MultiTurnDialogue {
            id: id.to_string(),
            topic: topic("anxiety"),
            transcript: build_transcript(roles),
            provenance: Some(Provenance {
                source_single_turn_id: format!("st-{id}"),
                provider_model_id: "mock".to_string(),
                seed: 7,
                template_version: "synthesis/v1".to_string(),
            }),
            extra: JsonMap::new(),
        }
    }

    #[test]
    fn dialogue_round_trip_preserves_unknown_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dialogues.json");
        let mut dialogue = sample_dialogue("d1", 4);
        dialogue
            .extra
            .insert("annotator".to_string(), serde_json::json!("x-17"));
        save_dialogues(std::slice::from_ref(&dialogue), &path).unwrap();
        let loaded = load_dialogues(&path).unwrap();
        assert_eq!(loaded, vec![dialogue]);
    }

    #[test]
    fn single_turn_rejection_names_the_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seeds.json");
        std::fs::write(
            &path,
            r#"[
                {"id": "ok", "topic": "anxiety", "title": "t", "detail": "d", "counselor_response": "r"},
                {"id": "bad", "topic": "anxiety", "title": "t", "detail": "d", "counselor_response": "  "}
            ]"#,
        )
        .unwrap();
        let err = load_single_turns(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("record 1"), "got: {msg}");
        assert!(msg.contains("`bad`"), "got: {msg}");
        assert!(msg.contains("counselor_response"), "got: {msg}");
    }

    #[test]
    fn parse_error_carries_record_index() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seeds.json");
        std::fs::write(&path, r#"[{"id": "a"}, {"id": "b", "topic": 3}]"#).unwrap();
        let err = load_single_turns(&path).unwrap_err();
        assert!(matches!(err, CorpusError::ParseRecord { index: 0, .. }));
    }

    #[test]
    fn mift_loads_both_array_and_line_delimited_forms() {
        let dir = tempfile::tempdir().unwrap();
        let line = r#"{"context":[{"role":"client","content":"hi"}],"target":"hello","source_dialogue_id":"d1","turn_index":1}"#;

        let jsonl = dir.path().join("samples.jsonl");
        std::fs::write(&jsonl, format!("{line}\n{line}\n")).unwrap();
        let from_lines = load_mift(&jsonl).unwrap();
        assert_eq!(from_lines.len(), 2);

        let array = dir.path().join("samples.json");
        save_mift(&from_lines, &array).unwrap();
        let from_array = load_mift(&array).unwrap();
        assert_eq!(from_lines, from_array);
    }

    #[test]
    fn unknown_fields_survive_on_every_record_kind() {
        let dir = tempfile::tempdir().unwrap();

        let seeds_path = dir.path().join("seeds.json");
        std::fs::write(
            &seeds_path,
            r#"[{"id": "a", "topic": "anxiety", "title": "t", "detail": "d",
                 "counselor_response": "r", "source_corpus": "survey-2023"}]"#,
        )
        .unwrap();
        let seeds = load_single_turns(&seeds_path).unwrap();
        assert_eq!(
            seeds[0].extra["source_corpus"],
            serde_json::json!("survey-2023")
        );
        save_single_turns(&seeds, &seeds_path).unwrap();
        assert_eq!(load_single_turns(&seeds_path).unwrap(), seeds);

        let mift_path = dir.path().join("samples.jsonl");
        std::fs::write(
            &mift_path,
            r#"{"context":[{"role":"client","content":"hi"}],"target":"t","source_dialogue_id":"d","turn_index":1,"fold":3}"#,
        )
        .unwrap();
        let samples = load_mift(&mift_path).unwrap();
        assert_eq!(samples[0].extra["fold"], serde_json::json!(3));
        save_mift(&samples, &mift_path).unwrap();
        assert_eq!(load_mift(&mift_path).unwrap(), samples);
    }

    #[test]
    fn five_thousand_record_file_loads_completely() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seeds.json");
        let seeds: Vec<SingleTurnDialogue> = (0..5000)
            .map(|i| SingleTurnDialogue {
                id: format!("st-{i:04}"),
                topic: topic("anxiety"),
                title: format!("title {i}"),
                detail: format!("detail {i}"),
                counselor_response: format!("response {i}"),
                extra: JsonMap::new(),
            })
            .collect();
        save_single_turns(&seeds, &path).unwrap();
        let loaded = load_single_turns(&path).unwrap();
        assert_eq!(loaded.len(), 5000);
        assert_eq!(loaded, seeds);
    }

    #[test]
    fn mift_context_must_end_with_client() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            r#"{"context":[{"role":"client","content":"hi"},{"role":"counselor","content":"x"}],"target":"t","source_dialogue_id":"d","turn_index":2}"#,
        )
        .unwrap();
        let err = load_mift(&path).unwrap_err();
        assert!(err.to_string().contains("end with a client utterance"));
    }

    #[test]
    fn topic_registry_accepts_both_entry_forms() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("topics.json");
        std::fs::write(
            &path,
            r#"["Anxiety", {"id": "self growth", "display_name": "Self Growth"}]"#,
        )
        .unwrap();
        let registry = load_topic_registry(&path).unwrap();
        assert_eq!(registry.len(), 2);
        assert!(registry.contains(&topic("anxiety")));
        assert!(registry.contains(&topic("self growth")));
    }

    #[test]
    fn ratings_file_bare_and_item_forms_agree() {
        let dir = tempfile::tempdir().unwrap();
        let bare = dir.path().join("bare.json");
        std::fs::write(&bare, "[[1,2],[3,0]]").unwrap();
        let items = dir.path().join("items.json");
        std::fs::write(
            &items,
            r#"{"items":[{"id":"i1","counts":[1,2]},{"id":"i2","counts":[3,0]}]}"#,
        )
        .unwrap();
        assert_eq!(
            load_ratings(&bare).unwrap().rows(),
            load_ratings(&items).unwrap().rows()
        );
    }

    proptest! {
        /// save ∘ load is the identity on dialogue collections.
        #[test]
        fn dialogue_save_load_round_trip(lens in proptest::collection::vec(1usize..8, 0..6)) {
            let dialogues: Vec<MultiTurnDialogue> = lens
                .iter()
                .enumerate()
                .map(|(i, len)| sample_dialogue(&format!("d{i}"), len * 2))
                .collect();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("corpus.json");
            save_dialogues(&dialogues, &path).unwrap();
            let loaded = load_dialogues(&path).unwrap();
            prop_assert_eq!(loaded, dialogues);
        }
    }
}
