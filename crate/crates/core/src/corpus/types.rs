//! Core domain types shared by every pipeline stage.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use super::CorpusError;

/// Unknown record fields carried through a load/save round trip.
pub type JsonMap = serde_json::Map<String, serde_json::Value>;

/// Normalizes a raw topic string: trim, lowercase, internal whitespace
/// collapsed to a single space.
pub fn normalize_topic(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Normalized topic key. Construction normalizes the raw string and rejects
/// anything that is empty afterwards.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct TopicId(String);

impl TopicId {
    pub fn new(raw: &str) -> Result<Self, CorpusError> {
        let normalized = normalize_topic(raw);
        if normalized.is_empty() {
            return Err(CorpusError::EmptyTopicId);
        }
        Ok(TopicId(normalized))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TopicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for TopicId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        TopicId::new(&raw).map_err(de::Error::custom)
    }
}

/// A counseling topic as configured in a registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounselingTopic {
    pub id: TopicId,
    pub display_name: String,
}

/// The configured set of counseling topics. Topics are configuration, not
/// code constants; the conventional deployment uses twelve.
#[derive(Debug, Clone, Default)]
pub struct TopicRegistry {
    topics: BTreeMap<TopicId, CounselingTopic>,
}

impl TopicRegistry {
    pub fn new(topics: Vec<CounselingTopic>) -> Result<Self, CorpusError> {
        let mut map = BTreeMap::new();
        for topic in topics {
            if map.insert(topic.id.clone(), topic.clone()).is_some() {
                return Err(CorpusError::DuplicateTopic(topic.id.to_string()));
            }
        }
        Ok(TopicRegistry { topics: map })
    }

    pub fn contains(&self, id: &TopicId) -> bool {
        self.topics.contains_key(id)
    }

    pub fn get(&self, id: &TopicId) -> Option<&CounselingTopic> {
        self.topics.get(id)
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CounselingTopic> {
        self.topics.values()
    }

    /// Checks that every dialogue topic in `topics` resolves here.
    pub fn check_closure<'a>(
        &self,
        topics: impl IntoIterator<Item = &'a TopicId>,
    ) -> Result<(), CorpusError> {
        for topic in topics {
            if !self.contains(topic) {
                return Err(CorpusError::UnknownTopic {
                    topic: topic.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Speaker role within a transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Client,
    Counselor,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Client => f.write_str("client"),
            Role::Counselor => f.write_str("counselor"),
        }
    }
}

/// One speaker message. A "turn" throughout this crate means a single
/// utterance (one speaker's message), not a client+counselor pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub role: Role,
    pub content: String,
    /// 0-based position in the parent transcript.
    pub index: usize,
}

/// Builds a transcript from (role, content) pairs, assigning indices.
pub fn build_transcript<I, S>(messages: I) -> Vec<Utterance>
where
    I: IntoIterator<Item = (Role, S)>,
    S: Into<String>,
{
    messages
        .into_iter()
        .enumerate()
        .map(|(index, (role, content))| Utterance {
            role,
            content: content.into(),
            index,
        })
        .collect()
}

/// Renders a transcript as speaker-labeled lines (`client: …`).
pub fn render_transcript(transcript: &[Utterance]) -> String {
    transcript
        .iter()
        .map(|u| format!("{}: {}", u.role, u.content))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A topic-tagged client question with a counselor's long-text response.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleTurnDialogue {
    pub id: String,
    pub topic: TopicId,
    pub title: String,
    pub detail: String,
    pub counselor_response: String,
    pub extra: JsonMap,
}

/// A real multi-turn counseling transcript for one topic; the one-shot
/// exemplar for style and technique extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct CounselingCase {
    pub id: String,
    pub topic: TopicId,
    pub transcript: Vec<Utterance>,
    pub sanitized: bool,
    pub extra: JsonMap,
}

/// Where a synthesized dialogue came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_single_turn_id: String,
    pub provider_model_id: String,
    pub seed: u64,
    pub template_version: String,
}

/// A validated alternating client/counselor transcript with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTurnDialogue {
    pub id: String,
    pub topic: TopicId,
    pub transcript: Vec<Utterance>,
    pub provenance: Option<Provenance>,
    pub extra: JsonMap,
}

/// Per-topic summary of a counselor's characteristic language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticStyleProfile {
    pub topic: TopicId,
    pub summary: String,
    pub source_case_id: String,
}

/// School of thought a therapeutic type belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum School {
    Psychodynamic,
    #[serde(rename = "Cognitive-Behavioral")]
    CognitiveBehavioral,
    Humanistic,
    Postmodern,
    Other,
}

impl fmt::Display for School {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            School::Psychodynamic => f.write_str("Psychodynamic"),
            School::CognitiveBehavioral => f.write_str("Cognitive-Behavioral"),
            School::Humanistic => f.write_str("Humanistic"),
            School::Postmodern => f.write_str("Postmodern"),
            School::Other => f.write_str("Other"),
        }
    }
}

/// A named therapy approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TherapeuticType {
    pub name: String,
    pub school: School,
}

/// One stage of a structured therapy technique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechniqueStage {
    pub title: String,
    pub guidance: String,
}

/// Knowledge-base entry describing how a therapeutic type is conducted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TherapyTechniqueEntry {
    pub therapeutic_type: TherapeuticType,
    pub description: String,
    #[serde(default)]
    pub stages: Vec<TechniqueStage>,
}

impl TherapyTechniqueEntry {
    /// Checks the entry invariants: non-empty description, unique stage titles.
    pub fn check(&self) -> Result<(), String> {
        if self.description.trim().is_empty() {
            return Err(format!(
                "technique `{}` has an empty description",
                self.therapeutic_type.name
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for stage in &self.stages {
            if !seen.insert(stage.title.as_str()) {
                return Err(format!(
                    "technique `{}` has duplicate stage title `{}`",
                    self.therapeutic_type.name, stage.title
                ));
            }
        }
        Ok(())
    }
}

/// 3-level rating for one Big Five dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraitLevel {
    Low,
    Medium,
    High,
}

impl<'de> Deserialize<'de> for TraitLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        match raw.trim().to_lowercase().as_str() {
            "low" => Ok(TraitLevel::Low),
            "medium" => Ok(TraitLevel::Medium),
            "high" => Ok(TraitLevel::High),
            other => Err(de::Error::custom(format!(
                "trait level must be low, medium, or high, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for TraitLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraitLevel::Low => f.write_str("low"),
            TraitLevel::Medium => f.write_str("medium"),
            TraitLevel::High => f.write_str("high"),
        }
    }
}

/// Level plus a prose rationale for one Big Five dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraitRating {
    pub level: TraitLevel,
    pub rationale: String,
}

pub(crate) const OCEAN_DIMENSIONS: [&str; 5] = [
    "openness",
    "conscientiousness",
    "extraversion",
    "agreeableness",
    "neuroticism",
];

/// A client's Big Five (OCEAN) personality profile.
///
/// Deserialization is strict: exactly the five dimension keys must appear,
/// each exactly once, each with a non-empty rationale. Keys are matched
/// case-insensitively.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersonalityProfile {
    pub openness: TraitRating,
    pub conscientiousness: TraitRating,
    pub extraversion: TraitRating,
    pub agreeableness: TraitRating,
    pub neuroticism: TraitRating,
}

impl PersonalityProfile {
    /// Dimensions in canonical O, C, E, A, N order.
    pub fn dimensions(&self) -> [(&'static str, &TraitRating); 5] {
        [
            ("openness", &self.openness),
            ("conscientiousness", &self.conscientiousness),
            ("extraversion", &self.extraversion),
            ("agreeableness", &self.agreeableness),
            ("neuroticism", &self.neuroticism),
        ]
    }
}

impl<'de> Deserialize<'de> for PersonalityProfile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ProfileVisitor;

        impl<'de> Visitor<'de> for ProfileVisitor {
            type Value = PersonalityProfile;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object with the five OCEAN dimension keys")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut slots: [Option<TraitRating>; 5] = Default::default();
                while let Some(key) = map.next_key::<String>()? {
                    let canonical = key.trim().to_lowercase();
                    let idx = OCEAN_DIMENSIONS
                        .iter()
                        .position(|d| *d == canonical)
                        .ok_or_else(|| {
                            de::Error::custom(format!("unknown dimension key `{key}`"))
                        })?;
                    if slots[idx].is_some() {
                        return Err(de::Error::custom(format!(
                            "duplicate dimension key `{key}`"
                        )));
                    }
                    slots[idx] = Some(map.next_value::<TraitRating>()?);
                }
                let mut ratings = Vec::with_capacity(5);
                for (idx, slot) in slots.into_iter().enumerate() {
                    let rating = slot.ok_or_else(|| {
                        de::Error::custom(format!("missing dimension `{}`", OCEAN_DIMENSIONS[idx]))
                    })?;
                    if rating.rationale.trim().is_empty() {
                        return Err(de::Error::custom(format!(
                            "empty rationale for dimension `{}`",
                            OCEAN_DIMENSIONS[idx]
                        )));
                    }
                    ratings.push(rating);
                }
                let mut it = ratings.into_iter();
                Ok(PersonalityProfile {
                    openness: it.next().unwrap(),
                    conscientiousness: it.next().unwrap(),
                    extraversion: it.next().unwrap(),
                    agreeableness: it.next().unwrap(),
                    neuroticism: it.next().unwrap(),
                })
            }
        }

        deserializer.deserialize_map(ProfileVisitor)
    }
}

/// One (dialogue-history, counselor-target) supervision pair.
///
/// `context` is the strict transcript prefix ending just before the
/// counselor utterance at `turn_index`; `target` is that utterance's
/// content. `system` carries an optional fixed system prompt attached at
/// export time; it is not part of the source transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct MiftSample {
    pub context: Vec<Utterance>,
    pub target: String,
    pub source_dialogue_id: String,
    pub turn_index: usize,
    pub system: Option<String>,
    pub extra: JsonMap,
}
