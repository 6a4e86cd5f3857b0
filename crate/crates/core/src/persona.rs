//! Big Five client-personality simulation from single-turn seed questions,
//! plus the lenient parser that turns provider replies into profiles.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::corpus::{PersonalityProfile, SingleTurnDialogue, TraitLevel, TraitRating};
use crate::provider::{ChatProvider, ChatRequest, ProviderError, TemplateError, TemplateStore};

#[derive(Debug, Error)]
pub enum PersonaError {
    #[error("personality reply unparseable: {detail}")]
    Parse { detail: String },

    #[error("no integer in 0..=10 found in richness reply `{reply}`")]
    ScoreParse { reply: String },

    #[error(transparent)]
    Provider(#[from] ProviderError),

    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// A parsed profile together with the raw provider text, kept for audit.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonaRecord {
    pub profile: PersonalityProfile,
    pub raw: String,
    pub attempts: u32,
}

/// Rationale used for ablated (neutral) personality profiles.
pub const NEUTRAL_RATIONALE: &str = "no personality signal provided";

/// All-medium profile used when the personality component is ablated.
pub fn neutral_profile() -> PersonalityProfile {
    let rating = || TraitRating {
        level: TraitLevel::Medium,
        rationale: NEUTRAL_RATIONALE.to_string(),
    };
    PersonalityProfile {
        openness: rating(),
        conscientiousness: rating(),
        extraversion: rating(),
        agreeableness: rating(),
        neuroticism: rating(),
    }
}

/// Parses a provider reply into a profile.
///
/// Accepts a bare JSON object or one wrapped in code fences / surrounding
/// prose: everything from the first `{` to the last `}` is parsed. The
/// object must contain exactly the five OCEAN keys, each once.
pub fn parse_personality(text: &str) -> Result<PersonalityProfile, PersonaError> {
    let start = text.find('{').ok_or_else(|| PersonaError::Parse {
        detail: "no JSON object found".to_string(),
    })?;
    let end = text
        .rfind('}')
        .filter(|e| *e > start)
        .ok_or_else(|| PersonaError::Parse {
            detail: "unterminated JSON object".to_string(),
        })?;
    serde_json::from_str::<PersonalityProfile>(&text[start..=end]).map_err(|e| {
        PersonaError::Parse {
            detail: e.to_string(),
        }
    })
}

/// Simulates the client's Big Five profile from their question. Request tag:
/// `persona:<id>`. Unparseable replies are re-asked up to `attempt_cap`
/// times in total.
pub fn simulate_personality(
    seed_dialogue: &SingleTurnDialogue,
    provider: &dyn ChatProvider,
    templates: &TemplateStore,
    seed: u64,
    attempt_cap: u32,
) -> Result<PersonaRecord, PersonaError> {
    let template = templates.load("persona", None)?;
    let mut slots = BTreeMap::new();
    slots.insert("title".to_string(), seed_dialogue.title.clone());
    slots.insert("detail".to_string(), seed_dialogue.detail.clone());
    let prompt = template.render(&slots)?.text;
    let tag = format!("persona:{}", seed_dialogue.id);

    let mut last_parse_error = None;
    for attempt in 1..=attempt_cap.max(1) {
        let response = provider.complete_chat(&ChatRequest::simple(&prompt, &tag, seed))?;
        match parse_personality(&response.text) {
            Ok(profile) => {
                return Ok(PersonaRecord {
                    profile,
                    raw: response.text,
                    attempts: attempt,
                })
            }
            Err(err) => last_parse_error = Some(err),
        }
    }
    Err(last_parse_error.expect("attempt_cap >= 1"))
}

/// Scores how vividly the seed question displays the client's personality,
/// as an integer in `0..=10`. Request tag: `richness:<id>`.
pub fn score_personality_richness(
    seed_dialogue: &SingleTurnDialogue,
    provider: &dyn ChatProvider,
    templates: &TemplateStore,
    seed: u64,
) -> Result<u8, PersonaError> {
    let template = templates.load("richness", None)?;
    let mut slots = BTreeMap::new();
    slots.insert("title".to_string(), seed_dialogue.title.clone());
    slots.insert("detail".to_string(), seed_dialogue.detail.clone());
    slots.insert(
        "counselor_response".to_string(),
        seed_dialogue.counselor_response.clone(),
    );
    let prompt = template.render(&slots)?.text;
    let tag = format!("richness:{}", seed_dialogue.id);
    let response = provider.complete_chat(&ChatRequest::simple(prompt, &tag, seed))?;
    parse_richness(&response.text).ok_or_else(|| PersonaError::ScoreParse {
        reply: response.text.chars().take(120).collect(),
    })
}

/// Extracts an integer in `0..=10` from free text. The whole trimmed reply
/// is preferred; otherwise the first in-range digit run after the last
/// `score` marker; otherwise the first in-range digit run anywhere.
fn parse_richness(text: &str) -> Option<u8> {
    let trimmed = text.trim();
    if let Ok(value) = trimmed.parse::<u8>() {
        if value <= 10 {
            return Some(value);
        }
    }
    let lower = text.to_lowercase();
    if let Some(pos) = lower.rfind("score") {
        if let Some(value) = first_in_range_int(&lower[pos..]) {
            return Some(value);
        }
    }
    first_in_range_int(&lower)
}

fn first_in_range_int(text: &str) -> Option<u8> {
    let mut digits = String::new();
    for c in text.chars().chain(std::iter::once(' ')) {
        if c.is_ascii_digit() {
            digits.push(c);
        } else if !digits.is_empty() {
            if let Ok(value) = digits.parse::<u8>() {
                if value <= 10 {
                    return Some(value);
                }
            }
            digits.clear();
        }
    }
    None
}
