//! Toolkit for synthesizing counselor-style multi-turn counseling dialogues
//! from single-turn seed questions, and for evaluating the resulting corpora
//! and model outputs.
//!
//! The crate is organized around the pipeline stages:
//!
//! * [`corpus`]: domain types, structural validation, and JSON persistence.
//! * [`provider`]: chat-completion access (HTTP or scripted mock) and
//!   prompt-template rendering.
//! * [`style`]: per-topic linguistic-style summaries and therapy-technique
//!   retrieval from a knowledge base.
//! * [`persona`]: Big Five client-personality simulation and parsing.
//! * [`synth`]: the dialogue synthesis pipeline, from topic matching and
//!   prompt assembly to transcript parsing and validation-driven retries.
//! * [`dataset`]: corpus statistics, richness filtering, stratified
//!   splitting, and instruction-tuning (MIFT) export.
//! * [`eval`]: overlap metrics, embedding-based scoring, inter-annotator
//!   agreement, LLM-judge scoring, and ablation voting.

pub mod corpus;
pub mod dataset;
pub mod eval;
pub mod persona;
pub mod provider;
pub mod style;
pub mod synth;

mod util;
