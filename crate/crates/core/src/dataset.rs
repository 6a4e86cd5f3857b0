//! Dataset statistics, richness filtering, stratified splitting, and MIFT
//! export.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{
    CorpusError, JsonMap, MiftSample, MultiTurnDialogue, Role, SingleTurnDialogue, TopicId,
};
use crate::util::hash64;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("seed `{seed_id}` has no richness score")]
    MissingScore { seed_id: String },

    #[error("topic `{topic}` has {count} dialogues, fewer than the {needed} required per-topic test dialogues")]
    InsufficientTopic {
        topic: String,
        count: usize,
        needed: usize,
    },

    #[error("failed to write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Corpus-level statistics.
///
/// A turn is a single utterance. `loc_avg` / `lop_avg` are means over all
/// client / counselor utterances across the corpus, measured in characters
/// with surrounding whitespace trimmed. All fields are zero on an empty
/// corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetStats {
    pub size: usize,
    pub not_avg: f64,
    pub loc_avg: f64,
    pub lop_avg: f64,
}

pub fn compute_stats(corpus: &[MultiTurnDialogue]) -> DatasetStats {
    if corpus.is_empty() {
        return DatasetStats {
            size: 0,
            not_avg: 0.0,
            loc_avg: 0.0,
            lop_avg: 0.0,
        };
    }
    let mut utterance_total = 0usize;
    let mut client_chars = 0usize;
    let mut client_count = 0usize;
    let mut counselor_chars = 0usize;
    let mut counselor_count = 0usize;
    for dialogue in corpus {
        utterance_total += dialogue.transcript.len();
        for utterance in &dialogue.transcript {
            let chars = utterance.content.trim().chars().count();
            match utterance.role {
                Role::Client => {
                    client_chars += chars;
                    client_count += 1;
                }
                Role::Counselor => {
                    counselor_chars += chars;
                    counselor_count += 1;
                }
            }
        }
    }
    let mean = |total: usize, count: usize| {
        if count == 0 {
            0.0
        } else {
            total as f64 / count as f64
        }
    };
    DatasetStats {
        size: corpus.len(),
        not_avg: utterance_total as f64 / corpus.len() as f64,
        loc_avg: mean(client_chars, client_count),
        lop_avg: mean(counselor_chars, counselor_count),
    }
}

/// Keeps seeds whose richness score meets the threshold, input order
/// preserved. Every seed must have a score.
pub fn filter_by_richness(
    seeds: Vec<SingleTurnDialogue>,
    scores: &BTreeMap<String, u8>,
    threshold: u8,
) -> Result<Vec<SingleTurnDialogue>, DatasetError> {
    for seed in &seeds {
        if !scores.contains_key(&seed.id) {
            return Err(DatasetError::MissingScore {
                seed_id: seed.id.clone(),
            });
        }
    }
    Ok(seeds
        .into_iter()
        .filter(|seed| scores[&seed.id] >= threshold)
        .collect())
}

/// A train/test split of a dialogue corpus.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<MultiTurnDialogue>,
    pub test: Vec<MultiTurnDialogue>,
}

/// Stratified split: exactly `per_topic_test` test dialogues per topic,
/// drawn by a seeded shuffle per topic; train is the complement. Both halves
/// preserve corpus order. The per-topic RNG is derived from the seed and the
/// topic id, so the outcome does not depend on topic iteration order.
pub fn split_dataset(
    corpus: &[MultiTurnDialogue],
    per_topic_test: usize,
    seed: u64,
) -> Result<DatasetSplit, DatasetError> {
    let mut by_topic: BTreeMap<&TopicId, Vec<usize>> = BTreeMap::new();
    for (index, dialogue) in corpus.iter().enumerate() {
        by_topic.entry(&dialogue.topic).or_default().push(index);
    }
    for (topic, indices) in &by_topic {
        if indices.len() < per_topic_test {
            return Err(DatasetError::InsufficientTopic {
                topic: topic.to_string(),
                count: indices.len(),
                needed: per_topic_test,
            });
        }
    }

    let mut in_test = vec![false; corpus.len()];
    for (topic, mut indices) in by_topic {
        let topic_seed = hash64(&[&seed.to_le_bytes(), topic.as_str().as_bytes()]);
        let mut rng = ChaCha8Rng::seed_from_u64(topic_seed);
        indices.shuffle(&mut rng);
        for &index in indices.iter().take(per_topic_test) {
            in_test[index] = true;
        }
    }

    let mut train = Vec::with_capacity(corpus.len().saturating_sub(per_topic_test));
    let mut test = Vec::new();
    for (index, dialogue) in corpus.iter().enumerate() {
        if in_test[index] {
            test.push(dialogue.clone());
        } else {
            train.push(dialogue.clone());
        }
    }
    Ok(DatasetSplit { train, test })
}

/// Exports one supervision sample per counselor utterance, in transcript
/// order: the context is everything strictly before that utterance and the
/// target is its content.
pub fn export_mift(dialogue: &MultiTurnDialogue) -> Vec<MiftSample> {
    dialogue
        .transcript
        .iter()
        .enumerate()
        .filter(|(_, utterance)| utterance.role == Role::Counselor)
        .map(|(turn_index, utterance)| MiftSample {
            context: dialogue.transcript[..turn_index].to_vec(),
            target: utterance.content.clone(),
            source_dialogue_id: dialogue.id.clone(),
            turn_index,
            system: None,
            extra: JsonMap::new(),
        })
        .collect()
}

/// Writes the whole corpus as line-delimited JSON MIFT records and returns
/// the record count. When `system_prompt` is set it is attached to every
/// record.
pub fn export_mift_corpus(
    corpus: &[MultiTurnDialogue],
    out: &Path,
    system_prompt: Option<&str>,
) -> Result<usize, DatasetError> {
    let file = std::fs::File::create(out).map_err(|source| DatasetError::Write {
        path: out.display().to_string(),
        source,
    })?;
    let mut writer = std::io::BufWriter::new(file);
    let mut count = 0usize;
    for dialogue in corpus {
        for mut sample in export_mift(dialogue) {
            sample.system = system_prompt.map(str::to_string);
            let line = crate::corpus::mift_to_json_line(&sample)?;
            writeln!(writer, "{line}").map_err(|source| DatasetError::Write {
                path: out.display().to_string(),
                source,
            })?;
            count += 1;
        }
    }
    writer.flush().map_err(|source| DatasetError::Write {
        path: out.display().to_string(),
        source,
    })?;
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_transcript, load_mift, Provenance};
    use proptest::prelude::*;
    use rand::Rng;

    fn topic(raw: &str) -> TopicId {
        TopicId::new(raw).unwrap()
    }

    fn dialogue_with(id: &str, topic_raw: &str, contents: &[(&str, Role)]) -> MultiTurnDialogue {
        MultiTurnDialogue {
            id: id.to_string(),
            topic: topic(topic_raw),
            transcript: build_transcript(contents.iter().map(|(content, role)| (*role, *content))),
            provenance: None,
            extra: JsonMap::new(),
        }
    }

    fn alternating(id: &str, topic_raw: &str, len: usize) -> MultiTurnDialogue {
        let contents: Vec<(Role, String)> = (0..len)
            .map(|i| {
                let role = if i % 2 == 0 {
                    Role::Client
                } else {
                    Role::Counselor
                };
                (role, format!("{id} message {i}"))
            })
            .collect();
        MultiTurnDialogue {
            id: id.to_string(),
            topic: topic(topic_raw),
            transcript: build_transcript(contents),
            provenance: Some(Provenance {
                source_single_turn_id: format!("st-{id}"),
                provider_model_id: "mock".to_string(),
                seed: 0,
                template_version: "synthesis/v1".to_string(),
            }),
            extra: JsonMap::new(),
        }
    }

    #[test]
    fn stats_on_documented_fixture() {
        // Dialogue 1: 4 utterances; dialogue 2: [client "ab", counselor "abcd"].
        let d1 = dialogue_with(
            "d1",
            "anxiety",
            &[
                ("ab", Role::Client),
                ("abcd", Role::Counselor),
                ("xy", Role::Client),
                ("wxyz", Role::Counselor),
            ],
        );
        let d2 = dialogue_with(
            "d2",
            "anxiety",
            &[("ab", Role::Client), ("abcd", Role::Counselor)],
        );
        let stats = compute_stats(&[d1, d2]);
        assert_eq!(stats.size, 2);
        assert_eq!(stats.not_avg, 3.0);
        assert_eq!(stats.loc_avg, 2.0);
        assert_eq!(stats.lop_avg, 4.0);
    }

    #[test]
    fn stats_empty_corpus_is_all_zeros() {
        let stats = compute_stats(&[]);
        assert_eq!(stats.size, 0);
        assert_eq!(stats.not_avg, 0.0);
        assert_eq!(stats.loc_avg, 0.0);
        assert_eq!(stats.lop_avg, 0.0);
    }

    #[test]
    fn stats_lengths_count_characters_not_bytes() {
        let d = dialogue_with(
            "d1",
            "anxiety",
            &[("你好", Role::Client), (" 咨询师answer ", Role::Counselor)],
        );
        let stats = compute_stats(&[d]);
        assert_eq!(stats.loc_avg, 2.0);
        assert_eq!(stats.lop_avg, 9.0);
    }

    #[test]
    fn richness_filter_contract() {
        let seeds = vec![
            crate::corpus::SingleTurnDialogue {
                id: "a".to_string(),
                topic: topic("anxiety"),
                title: "t".to_string(),
                detail: "d".to_string(),
                counselor_response: "r".to_string(),
                extra: JsonMap::new(),
            },
            crate::corpus::SingleTurnDialogue {
                id: "b".to_string(),
                topic: topic("anxiety"),
                title: "t".to_string(),
                detail: "d".to_string(),
                counselor_response: "r".to_string(),
                extra: JsonMap::new(),
            },
        ];
        let scores: BTreeMap<String, u8> = [("a".to_string(), 7), ("b".to_string(), 6)].into();

        let kept = filter_by_richness(seeds.clone(), &scores, 7).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "a");

        // threshold 0 is the identity, threshold 11 empties (scores cap at 10)
        assert_eq!(
            filter_by_richness(seeds.clone(), &scores, 0).unwrap().len(),
            2
        );
        assert!(filter_by_richness(seeds.clone(), &scores, 11)
            .unwrap()
            .is_empty());

        let missing: BTreeMap<String, u8> = [("a".to_string(), 7)].into();
        let err = filter_by_richness(seeds, &missing, 0).unwrap_err();
        assert!(matches!(err, DatasetError::MissingScore { seed_id } if seed_id == "b"));
    }

    #[test]
    fn split_counts_partition_and_determinism() {
        let topics = ["t0", "t1", "t2"];
        let corpus: Vec<MultiTurnDialogue> = (0..90)
            .map(|i| alternating(&format!("d{i}"), topics[i % 3], 4))
            .collect();

        let split = split_dataset(&corpus, 5, 42).unwrap();
        assert_eq!(split.test.len(), 15);
        assert_eq!(split.train.len(), 75);
        for t in topics {
            let count = split.test.iter().filter(|d| d.topic == topic(t)).count();
            assert_eq!(count, 5);
        }
        // Disjoint, union = corpus.
        let mut ids: Vec<&str> = split
            .train
            .iter()
            .chain(&split.test)
            .map(|d| d.id.as_str())
            .collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), corpus.len());

        let again = split_dataset(&corpus, 5, 42).unwrap();
        let test_ids = |split: &DatasetSplit| -> Vec<String> {
            split.test.iter().map(|d| d.id.clone()).collect()
        };
        assert_eq!(test_ids(&split), test_ids(&again));
        let other_seed = split_dataset(&corpus, 5, 43).unwrap();
        assert_ne!(test_ids(&split), test_ids(&other_seed));
    }

    #[test]
    fn split_zero_test_and_insufficient_topic() {
        let corpus: Vec<MultiTurnDialogue> = (0..19)
            .map(|i| alternating(&format!("d{i}"), "only", 2))
            .collect();
        let split = split_dataset(&corpus, 0, 1).unwrap();
        assert!(split.test.is_empty());
        assert_eq!(split.train.len(), 19);

        let err = split_dataset(&corpus, 20, 1).unwrap_err();
        assert!(matches!(
            err,
            DatasetError::InsufficientTopic { topic, count: 19, needed: 20 } if topic == "only"
        ));
    }

    #[test]
    fn mift_per_dialogue_examples() {
        // [C,P,C,P] → 2 samples with context lengths 1 and 3.
        let d = alternating("d1", "anxiety", 4);
        let samples = export_mift(&d);
        assert_eq!(samples.len(), 2);
        assert_eq!(samples[0].context.len(), 1);
        assert_eq!(samples[0].turn_index, 1);
        assert_eq!(samples[1].context.len(), 3);
        assert_eq!(samples[1].turn_index, 3);
        assert_eq!(samples[1].target, d.transcript[3].content);

        // [C,P] → one sample, context [C].
        let d = alternating("d2", "anxiety", 2);
        let samples = export_mift(&d);
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].context.len(), 1);
        assert_eq!(samples[0].context[0].role, Role::Client);
    }

    #[test]
    fn mift_corpus_export_counts_and_round_trips() {
        let corpus: Vec<MultiTurnDialogue> = [4usize, 6, 8]
            .iter()
            .enumerate()
            .map(|(i, len)| alternating(&format!("d{i}"), "anxiety", *len))
            .collect();
        // Counselor turns: 2 + 3 + 4 = 9.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mift.jsonl");
        let count = export_mift_corpus(&corpus, &path, Some("stay in role")).unwrap();
        assert_eq!(count, 9);

        let loaded = load_mift(&path).unwrap();
        assert_eq!(loaded.len(), 9);
        assert!(loaded
            .iter()
            .all(|s| s.system.as_deref() == Some("stay in role")));

        // Empty corpus → empty file.
        let empty = dir.path().join("empty.jsonl");
        assert_eq!(export_mift_corpus(&[], &empty, None).unwrap(), 0);
        assert_eq!(std::fs::read_to_string(&empty).unwrap(), "");
    }

    proptest! {
        /// Sample count equals an independent counselor-turn scan, every
        /// context is a strict prefix, and every context ends at a client
        /// utterance.
        #[test]
        fn mift_prefix_property(lens in proptest::collection::vec(1usize..10, 1..10)) {
            for (i, half) in lens.iter().enumerate() {
                let dialogue = alternating(&format!("d{i}"), "anxiety", half * 2);
                let samples = export_mift(&dialogue);
                let counselor_turns = dialogue
                    .transcript
                    .iter()
                    .filter(|u| u.role == Role::Counselor)
                    .count();
                prop_assert_eq!(samples.len(), counselor_turns);
                for sample in &samples {
                    prop_assert_eq!(sample.context.len(), sample.turn_index);
                    prop_assert_eq!(
                        &sample.context[..],
                        &dialogue.transcript[..sample.turn_index]
                    );
                    prop_assert_eq!(sample.context.last().unwrap().role, Role::Client);
                    prop_assert_eq!(
                        &sample.target,
                        &dialogue.transcript[sample.turn_index].content
                    );
                }
            }
        }

        /// Concatenating corpora yields size-weighted averages (to 1e-12).
        #[test]
        fn stats_linearity(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut make_corpus = |prefix: &str| -> Vec<MultiTurnDialogue> {
                let n = rng.gen_range(1..8);
                (0..n)
                    .map(|i| {
                        let half = rng.gen_range(1..6);
                        alternating(&format!("{prefix}{i}"), "anxiety", half * 2)
                    })
                    .collect()
            };
            let a = make_corpus("a");
            let b = make_corpus("b");
            let mut joined = a.clone();
            joined.extend(b.clone());

            let sa = compute_stats(&a);
            let sb = compute_stats(&b);
            let sj = compute_stats(&joined);

            let weight = |c: &[MultiTurnDialogue], role: Role| -> f64 {
                c.iter()
                    .flat_map(|d| &d.transcript)
                    .filter(|u| u.role == role)
                    .count() as f64
            };

            let not_expected = (sa.not_avg * a.len() as f64 + sb.not_avg * b.len() as f64)
                / (a.len() + b.len()) as f64;
            prop_assert!((sj.not_avg - not_expected).abs() < 1e-12);

            let (ca, cb) = (weight(&a, Role::Client), weight(&b, Role::Client));
            let loc_expected = (sa.loc_avg * ca + sb.loc_avg * cb) / (ca + cb);
            prop_assert!((sj.loc_avg - loc_expected).abs() < 1e-12);

            let (pa, pb) = (weight(&a, Role::Counselor), weight(&b, Role::Counselor));
            let lop_expected = (sa.lop_avg * pa + sb.lop_avg * pb) / (pa + pb);
            prop_assert!((sj.lop_avg - lop_expected).abs() < 1e-12);
        }
    }
}
