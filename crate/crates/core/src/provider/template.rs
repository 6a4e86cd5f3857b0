//! Prompt templates with named `{{slot}}` placeholders.
//!
//! Templates live in versioned plain-text files laid out as
//! `templates/<stage>/<version>.txt`; built-in defaults for every pipeline
//! stage are compiled into the crate. The rendered template version is
//! recorded in dialogue provenance so synthesized corpora stay traceable.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template `{id}` is malformed: {detail}")]
    Malformed { id: String, detail: String },

    #[error("required slot `{slot}` is not present in the template body")]
    UndeclaredRequired { slot: String },

    #[error("missing value for required slot `{slot}`")]
    MissingSlot { slot: String },

    #[error("no template for stage `{stage}` version {version:?}")]
    NotFound { stage: String, version: String },

    #[error("failed to read template {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
}

/// Version label used by the compiled-in templates.
pub const BUILTIN_VERSION: &str = "v1";

const BUILTIN_TEMPLATES: &[(&str, &str)] = &[
    (
        "style_summary",
        include_str!("../../templates/style_summary/v1.txt"),
    ),
    (
        "therapeutic_type",
        include_str!("../../templates/therapeutic_type/v1.txt"),
    ),
    ("persona", include_str!("../../templates/persona/v1.txt")),
    ("richness", include_str!("../../templates/richness/v1.txt")),
    (
        "synthesis",
        include_str!("../../templates/synthesis/v1.txt"),
    ),
    ("judge", include_str!("../../templates/judge/v1.txt")),
    (
        "chat_system",
        include_str!("../../templates/chat_system/v1.txt"),
    ),
];

/// Result of rendering: the prompt text plus any provided slots the template
/// did not use (reported, not fatal).
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub text: String,
    pub ignored_slots: Vec<String>,
}

/// A prompt template with named slots.
///
/// Every slot found in the body is required unless the template is built
/// with [`PromptTemplate::with_required`], in which case the remaining slots
/// are optional and render as empty text when no value is supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    id: String,
    version: String,
    body: String,
    required_slots: BTreeSet<String>,
    found_slots: BTreeSet<String>,
}

impl PromptTemplate {
    pub fn new(
        id: impl Into<String>,
        version: impl Into<String>,
        body: impl Into<String>,
    ) -> Result<Self, TemplateError> {
        let id = id.into();
        let body = body.into();
        let found_slots = scan_slots(&id, &body)?;
        Ok(PromptTemplate {
            id,
            version: version.into(),
            required_slots: found_slots.clone(),
            found_slots,
            body,
        })
    }

    /// Builds a template where only `required` slots must be supplied.
    pub fn with_required<I, S>(
        id: impl Into<String>,
        version: impl Into<String>,
        body: impl Into<String>,
        required: I,
    ) -> Result<Self, TemplateError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut template = PromptTemplate::new(id, version, body)?;
        let required: BTreeSet<String> = required.into_iter().map(Into::into).collect();
        for slot in &required {
            if !template.found_slots.contains(slot) {
                return Err(TemplateError::UndeclaredRequired { slot: slot.clone() });
            }
        }
        template.required_slots = required;
        Ok(template)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    /// `<stage>/<version>` label recorded in provenance.
    pub fn version_label(&self) -> String {
        format!("{}/{}", self.id, self.version)
    }

    pub fn required_slots(&self) -> &BTreeSet<String> {
        &self.required_slots
    }

    pub fn slots(&self) -> &BTreeSet<String> {
        &self.found_slots
    }

    /// Substitutes every slot occurrence. Required slots must be present in
    /// `slots`; optional slots default to empty text. Every `{{…}}` in the
    /// body is resolved; substituted values pass through verbatim.
    pub fn render(&self, slots: &BTreeMap<String, String>) -> Result<Rendered, TemplateError> {
        for required in &self.required_slots {
            if !slots.contains_key(required) {
                return Err(TemplateError::MissingSlot {
                    slot: required.clone(),
                });
            }
        }
        let ignored_slots: Vec<String> = slots
            .keys()
            .filter(|k| !self.found_slots.contains(*k))
            .cloned()
            .collect();

        let mut text = String::with_capacity(self.body.len());
        let mut rest = self.body.as_str();
        while let Some(open) = rest.find("{{") {
            text.push_str(&rest[..open]);
            let after = &rest[open + 2..];
            // scan_slots already guaranteed a well-formed close.
            let close = after.find("}}").expect("slot scanned at construction");
            let name = &after[..close];
            if let Some(value) = slots.get(name) {
                text.push_str(value);
            }
            rest = &after[close + 2..];
        }
        text.push_str(rest);
        Ok(Rendered {
            text,
            ignored_slots,
        })
    }
}

fn scan_slots(id: &str, body: &str) -> Result<BTreeSet<String>, TemplateError> {
    let mut slots = BTreeSet::new();
    let mut rest = body;
    while let Some(open) = rest.find("{{") {
        let after = &rest[open + 2..];
        let close = after.find("}}").ok_or_else(|| TemplateError::Malformed {
            id: id.to_string(),
            detail: "unclosed `{{`".to_string(),
        })?;
        let name = &after[..close];
        if name.is_empty()
            || !name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(TemplateError::Malformed {
                id: id.to_string(),
                detail: format!("invalid slot name `{name}`"),
            });
        }
        slots.insert(name.to_string());
        rest = &after[close + 2..];
    }
    Ok(slots)
}

/// Loads stage templates either from a directory laid out as
/// `<root>/<stage>/<version>.txt` or from the compiled-in defaults.
#[derive(Debug, Clone, Default)]
pub struct TemplateStore {
    root: Option<PathBuf>,
}

impl TemplateStore {
    /// Store backed only by the compiled-in templates.
    pub fn builtin() -> Self {
        TemplateStore { root: None }
    }

    /// Store backed by an on-disk template directory, falling back to the
    /// compiled-in defaults for stages the directory does not cover.
    pub fn with_root(root: impl Into<PathBuf>) -> Self {
        TemplateStore {
            root: Some(root.into()),
        }
    }

    /// Loads `stage` at `version`; `None` selects the newest on-disk version
    /// (highest file name) or the built-in default.
    pub fn load(
        &self,
        stage: &str,
        version: Option<&str>,
    ) -> Result<PromptTemplate, TemplateError> {
        if let Some(root) = &self.root {
            let stage_dir = root.join(stage);
            if stage_dir.is_dir() {
                let version = match version {
                    Some(v) => v.to_string(),
                    None => newest_version(&stage_dir)?.ok_or_else(|| TemplateError::NotFound {
                        stage: stage.to_string(),
                        version: "latest".to_string(),
                    })?,
                };
                let path = stage_dir.join(format!("{version}.txt"));
                let body =
                    std::fs::read_to_string(&path).map_err(|source| TemplateError::Read {
                        path: path.display().to_string(),
                        source,
                    })?;
                return PromptTemplate::new(stage, version, body);
            }
        }
        let body = BUILTIN_TEMPLATES
            .iter()
            .find(|(name, _)| *name == stage)
            .map(|(_, body)| *body)
            .ok_or_else(|| TemplateError::NotFound {
                stage: stage.to_string(),
                version: version.unwrap_or(BUILTIN_VERSION).to_string(),
            })?;
        match version {
            Some(v) if v != BUILTIN_VERSION => Err(TemplateError::NotFound {
                stage: stage.to_string(),
                version: v.to_string(),
            }),
            _ => PromptTemplate::new(stage, BUILTIN_VERSION, body),
        }
    }
}

fn newest_version(dir: &std::path::Path) -> Result<Option<String>, TemplateError> {
    let entries = std::fs::read_dir(dir).map_err(|source| TemplateError::Read {
        path: dir.display().to_string(),
        source,
    })?;
    let mut versions: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            name.strip_suffix(".txt").map(str::to_string)
        })
        .collect();
    // Length-then-lexicographic keeps v2 < v10.
    versions.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(versions.pop())
}
