//! Therapy-technique knowledge base.
//!
//! Entries are indexed by normalized therapeutic-type name; an alias table
//! maps common short forms (e.g. `REBT`) to full names. Free-text provider
//! output never leaves this module unresolved: classification either lands
//! on a KB entry or fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::StyleError;
use crate::corpus::{School, TechniqueStage, TherapeuticType, TherapyTechniqueEntry};

/// Normalizes a therapeutic-type name for lookup: lowercase, punctuation
/// stripped (hyphens become spaces), whitespace collapsed.
pub fn normalize_type_name(raw: &str) -> String {
    let mut cleaned = String::with_capacity(raw.len());
    for c in raw.chars() {
        if c.is_alphanumeric() {
            for lower in c.to_lowercase() {
                cleaned.push(lower);
            }
        } else if c.is_whitespace() || c == '-' || c == '_' || c == '/' {
            cleaned.push(' ');
        }
        // Other punctuation is dropped.
    }
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct KbTypeRecord {
    name: String,
    school: School,
    #[serde(default)]
    aliases: Vec<String>,
    description: String,
    #[serde(default)]
    stages: Vec<TechniqueStage>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct KbFile {
    types: Vec<KbTypeRecord>,
}

/// The technique knowledge base.
#[derive(Debug, Clone, Default)]
pub struct TechniqueKB {
    entries: BTreeMap<String, TherapyTechniqueEntry>,
    aliases: BTreeMap<String, String>,
}

static BUILTIN: OnceLock<TechniqueKB> = OnceLock::new();

impl TechniqueKB {
    /// The compiled-in seed knowledge base covering the common therapeutic
    /// types. Only the REBT entry carries full stage text; the others ship
    /// with a one-line description users are expected to extend.
    pub fn builtin() -> &'static TechniqueKB {
        BUILTIN.get_or_init(|| {
            TechniqueKB::from_json(include_str!("../../assets/kb.json"))
                .expect("builtin KB is valid")
        })
    }

    pub fn from_json(text: &str) -> Result<Self, StyleError> {
        let file: KbFile =
            serde_json::from_str(text).map_err(|e| StyleError::KbParse(e.to_string()))?;
        let mut kb = TechniqueKB::default();
        for record in file.types {
            let key = normalize_type_name(&record.name);
            if key.is_empty() {
                return Err(StyleError::KbParse("empty type name".to_string()));
            }
            let entry = TherapyTechniqueEntry {
                therapeutic_type: TherapeuticType {
                    name: record.name.clone(),
                    school: record.school,
                },
                description: record.description,
                stages: record.stages,
            };
            entry.check().map_err(StyleError::KbParse)?;
            if kb.entries.insert(key.clone(), entry).is_some() {
                return Err(StyleError::KbParse(format!(
                    "duplicate type `{}`",
                    record.name
                )));
            }
            for alias in record.aliases {
                let alias_key = normalize_type_name(&alias);
                if alias_key.is_empty() {
                    continue;
                }
                if let Some(existing) = kb.aliases.insert(alias_key, key.clone()) {
                    if existing != key {
                        return Err(StyleError::KbParse(format!(
                            "alias `{alias}` maps to two types"
                        )));
                    }
                }
            }
        }
        Ok(kb)
    }

    pub fn load(path: &Path) -> Result<Self, StyleError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StyleError::KbParse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Resolves free text to a KB entry via normalization and aliases.
    pub fn resolve(&self, raw: &str) -> Option<&TherapyTechniqueEntry> {
        let key = normalize_type_name(raw);
        if let Some(entry) = self.entries.get(&key) {
            return Some(entry);
        }
        self.aliases.get(&key).and_then(|k| self.entries.get(k))
    }

    /// Looks up an already-classified type; a miss names the type.
    pub fn lookup(&self, ttype: &TherapeuticType) -> Result<&TherapyTechniqueEntry, StyleError> {
        self.resolve(&ttype.name)
            .ok_or_else(|| StyleError::LookupMiss {
                name: ttype.name.clone(),
            })
    }

    /// Entry names in index order, for prompt construction.
    pub fn type_names(&self) -> Vec<&str> {
        self.entries
            .values()
            .map(|e| e.therapeutic_type.name.as_str())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_examples() {
        assert_eq!(
            normalize_type_name("  Rational   Emotive Behavior Therapy "),
            "rational emotive behavior therapy"
        );
        assert_eq!(
            normalize_type_name("Cognitive-Behavioral"),
            "cognitive behavioral"
        );
        assert_eq!(normalize_type_name("R.E.B.T."), "rebt");
    }

    #[test]
    fn builtin_kb_resolves_full_names_and_aliases() {
        let kb = TechniqueKB::builtin();
        let entry = kb.resolve("Rational Emotive Behavior Therapy").unwrap();
        assert_eq!(entry.therapeutic_type.school, School::CognitiveBehavioral);
        assert_eq!(entry.stages.len(), 4);
        assert_eq!(entry.stages[1].title, "Debate Irrational Beliefs");

        let via_alias = kb.resolve("REBT").unwrap();
        assert_eq!(via_alias.therapeutic_type.name, entry.therapeutic_type.name);

        assert!(kb.resolve("crystal healing").is_none());
    }

    #[test]
    fn builtin_kb_covers_the_common_schools() {
        let kb = TechniqueKB::builtin();
        assert_eq!(kb.len(), 10);
        let schools: std::collections::BTreeSet<String> = kb
            .entries
            .values()
            .map(|e| e.therapeutic_type.school.to_string())
            .collect();
        assert!(schools.contains("Psychodynamic"));
        assert!(schools.contains("Cognitive-Behavioral"));
        assert!(schools.contains("Humanistic"));
        assert!(schools.contains("Postmodern"));
    }

    #[test]
    fn conflicting_alias_rejected() {
        let err = TechniqueKB::from_json(
            r#"{"types": [
                {"name": "A", "school": "Other", "aliases": ["x"], "description": "d"},
                {"name": "B", "school": "Other", "aliases": ["x"], "description": "d"}
            ]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("maps to two types"));
    }
}
