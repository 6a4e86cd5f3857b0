//! Deterministic scripted provider for tests and offline runs.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{ChatProvider, ChatRequest, ChatResponse, EmbeddingProvider, ProviderError, Usage};
use crate::util::hash64;

/// A script mapping request tags to one or more canned replies.
///
/// A tag with several replies answers them in order and then repeats the
/// last one. Tags absent from the script fall back to a seeded generator
/// when `fallback_seed` is set, and error otherwise.
#[derive(Debug, Clone, Default)]
pub struct MockScript {
    entries: BTreeMap<String, Vec<String>>,
    fallback_seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Deserialize)]
struct ScriptFile {
    #[serde(default)]
    script: BTreeMap<String, OneOrMany>,
    #[serde(default)]
    fallback_seed: Option<u64>,
}

impl MockScript {
    pub fn new(entries: BTreeMap<String, Vec<String>>, fallback_seed: Option<u64>) -> Self {
        MockScript {
            entries,
            fallback_seed,
        }
    }

    /// Builds a script from (tag, replies) pairs, rejecting duplicate tags.
    pub fn from_pairs<I, S>(pairs: I, fallback_seed: Option<u64>) -> Result<Self, ProviderError>
    where
        I: IntoIterator<Item = (S, Vec<String>)>,
        S: Into<String>,
    {
        let mut entries = BTreeMap::new();
        for (tag, replies) in pairs {
            let tag = tag.into();
            if entries.insert(tag.clone(), replies).is_some() {
                return Err(ProviderError::InvalidRequest(format!(
                    "duplicate script tag `{tag}`"
                )));
            }
        }
        Ok(MockScript {
            entries,
            fallback_seed,
        })
    }

    pub fn insert(&mut self, tag: impl Into<String>, replies: Vec<String>) {
        self.entries.insert(tag.into(), replies);
    }

    pub fn with_fallback_seed(mut self, seed: u64) -> Self {
        self.fallback_seed = Some(seed);
        self
    }

    /// Parses the JSON script format:
    /// `{"script": {"tag": "reply" | ["r1","r2"]}, "fallback_seed": 7}`.
    pub fn from_json(text: &str) -> Result<Self, ProviderError> {
        let file: ScriptFile = serde_json::from_str(text)
            .map_err(|e| ProviderError::InvalidRequest(format!("invalid mock script: {e}")))?;
        let entries = file
            .script
            .into_iter()
            .map(|(tag, replies)| {
                let replies = match replies {
                    OneOrMany::One(r) => vec![r],
                    OneOrMany::Many(rs) => rs,
                };
                (tag, replies)
            })
            .collect();
        Ok(MockScript {
            entries,
            fallback_seed: file.fallback_seed,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ProviderError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ProviderError::InvalidRequest(format!(
                "cannot read mock script {}: {e}",
                path.display()
            ))
        })?;
        Self::from_json(&text)
    }
}

/// Scripted chat provider: answers deterministically by request tag.
pub struct MockProvider {
    script: MockScript,
    counters: Mutex<BTreeMap<String, usize>>,
    model_id: String,
}

impl MockProvider {
    pub fn new(script: MockScript) -> Self {
        MockProvider {
            script,
            counters: Mutex::new(BTreeMap::new()),
            model_id: "mock".to_string(),
        }
    }

    pub fn with_model_id(mut self, model_id: impl Into<String>) -> Self {
        self.model_id = model_id.into();
        self
    }

    fn next_index(&self, tag: &str) -> usize {
        let mut counters = self.counters.lock().expect("mock counter lock");
        let counter = counters.entry(tag.to_string()).or_insert(0);
        let index = *counter;
        *counter += 1;
        index
    }
}

impl ChatProvider for MockProvider {
    fn complete_chat(&self, request: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        request.decoding.check()?;
        let index = self.next_index(&request.tag);
        let text = match self.script.entries.get(&request.tag) {
            Some(replies) => {
                // Replies play in order; the last one repeats.
                let slot = index.min(replies.len().saturating_sub(1));
                replies.get(slot).cloned().unwrap_or_default()
            }
            None => match self.script.fallback_seed {
                Some(seed) => fallback_text(seed, &request.tag, index),
                None => {
                    return Err(ProviderError::UnknownTag {
                        tag: request.tag.clone(),
                    })
                }
            },
        };
        if text.is_empty() {
            return Err(ProviderError::Refusal {
                tag: request.tag.clone(),
            });
        }
        let usage = Usage {
            prompt_units: request.prompt_chars(),
            completion_units: text.chars().count() as u64,
        };
        Ok(ChatResponse {
            text,
            provider_model_id: self.model_id.clone(),
            usage,
        })
    }

    fn model_id(&self) -> &str {
        &self.model_id
    }
}

fn fallback_text(seed: u64, tag: &str, index: usize) -> String {
    let h = hash64(&[
        &seed.to_le_bytes(),
        tag.as_bytes(),
        &(index as u64).to_le_bytes(),
    ]);
    format!("[mock:{tag}#{index}] {h:016x}")
}

/// Deterministic embedding provider: each token maps to a fixed unit vector
/// derived from its hash. Identical tokens always embed identically.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dim: usize,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder { dim: 16 }
    }
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "embedding dimension must be at least 1");
        HashEmbedder { dim }
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn embed(&self, tokens: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Ok(tokens
            .iter()
            .map(|token| {
                let mut rng = ChaCha8Rng::seed_from_u64(hash64(&[token.as_bytes()]));
                let mut vector: Vec<f64> =
                    (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > f64::EPSILON {
                    for x in &mut vector {
                        *x /= norm;
                    }
                } else {
                    vector[0] = 1.0;
                }
                vector
            })
            .collect())
    }
}
