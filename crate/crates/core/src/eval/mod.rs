//! Evaluation toolkit: text-overlap metrics, embedding-based scoring,
//! inter-annotator agreement, LLM-judge scoring, and ablation voting.

mod bertscore;
mod judge;
mod kappa;
mod overlap;
mod report;
mod tokenize;
mod vote;

pub use bertscore::{bert_score_f, BertScore};
pub use judge::{judge_score, parse_judge_reply, JudgeDimension, JudgeVerdict};
pub use kappa::{fleiss_kappa, RatingMatrix};
pub use overlap::{bleu4, rouge_l, rouge_l_weighted, rouge_n, OverlapScore};
pub use report::{evaluate_model_outputs, EvalPair, MetricReport, PairTokenizer};
pub use tokenize::{tokenize, TokenizeMode};
pub use vote::{majority_vote, ItemVotes, VoteOutcome};

use thiserror::Error;

use crate::provider::ProviderError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("embedding dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("zero embedding vector at position {index}")]
    ZeroVector { index: usize },

    #[error("rating matrix invalid: {0}")]
    InvalidRatings(String),

    #[error(
        "degenerate agreement: expected chance agreement is 1 but observed agreement is {observed}"
    )]
    DegenerateAgreement { observed: f64 },

    #[error("no pairs to evaluate")]
    EmptyPairs,

    #[error("pair {index} lacks pre-tokenized input required by the `provided` tokenizer")]
    MissingProvidedTokens { index: usize },

    #[error("judge reply has no `Score: <int>` line: {reply}")]
    JudgeParse { reply: String },

    #[error("judge score {found} is outside the {dimension} scale {min}..={max}")]
    OutOfScale {
        dimension: String,
        found: i64,
        min: i64,
        max: i64,
    },

    #[error("no judges configured")]
    NoJudges,

    #[error("rater `{rater}` has no rating for item `{item}`")]
    MissingRating { item: String, rater: String },

    #[error("no vote items")]
    EmptyVotes,

    #[error(transparent)]
    Provider(#[from] ProviderError),

    #[error(transparent)]
    Template(#[from] crate::provider::TemplateError),
}
