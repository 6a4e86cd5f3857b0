//! Corpus-level automatic evaluation over (generated, reference) pairs.

use serde::{Deserialize, Serialize};

use super::bertscore::bert_score_f;
use super::overlap::{bleu4, rouge_l, rouge_n};
use super::tokenize::{tokenize, TokenizeMode};
use super::EvalError;
use crate::provider::EmbeddingProvider;

/// One generated/reference pair. The `*_tokens` fields carry pre-tokenized
/// input for the `provided` tokenizer path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPair {
    pub generated: String,
    pub reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_tokens: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_tokens: Option<Vec<String>>,
}

/// How pairs are tokenized before metric computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairTokenizer {
    Mode(TokenizeMode),
    /// Use the pre-tokenized fields shipped with each pair.
    Provided,
}

impl std::str::FromStr for PairTokenizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "whitespace" => Ok(PairTokenizer::Mode(TokenizeMode::Whitespace)),
            "cjk_char" => Ok(PairTokenizer::Mode(TokenizeMode::CjkChar)),
            "provided" => Ok(PairTokenizer::Provided),
            other => Err(format!(
                "unknown tokenizer `{other}` (expected cjk_char, whitespace, or provided)"
            )),
        }
    }
}

/// Macro-averaged automatic metrics, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
    pub bleu4: f64,
    pub f_bert: f64,
}

impl MetricReport {
    /// Table-style CSV: values ×100, two decimals.
    pub fn to_csv(&self) -> String {
        format!(
            "rouge1,rouge2,rouge_l,bleu4,f_bert\n{:.2},{:.2},{:.2},{:.2},{:.2}\n",
            self.rouge1 * 100.0,
            self.rouge2 * 100.0,
            self.rouge_l * 100.0,
            self.bleu4 * 100.0,
            self.f_bert * 100.0,
        )
    }
}

/// Computes the metric battery for every pair and macro-averages.
pub fn evaluate_model_outputs(
    pairs: &[EvalPair],
    tokenizer: PairTokenizer,
    embedder: &dyn EmbeddingProvider,
) -> Result<MetricReport, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyPairs);
    }
    let mut sums = MetricReport {
        rouge1: 0.0,
        rouge2: 0.0,
        rouge_l: 0.0,
        bleu4: 0.0,
        f_bert: 0.0,
    };
    for (index, pair) in pairs.iter().enumerate() {
        let (generated, reference) = pair_tokens(pair, index, tokenizer)?;
        sums.rouge1 += rouge_n(&generated, &reference, 1).f1;
        sums.rouge2 += rouge_n(&generated, &reference, 2).f1;
        sums.rouge_l += rouge_l(&generated, &reference).f1;
        sums.bleu4 += bleu4(&generated, &reference);
        let cand_embeddings = embedder.embed(&generated)?;
        let ref_embeddings = embedder.embed(&reference)?;
        sums.f_bert += bert_score_f(&cand_embeddings, &ref_embeddings)?.f;
    }
    let count = pairs.len() as f64;
    Ok(MetricReport {
        rouge1: sums.rouge1 / count,
        rouge2: sums.rouge2 / count,
        rouge_l: sums.rouge_l / count,
        bleu4: sums.bleu4 / count,
        f_bert: sums.f_bert / count,
    })
}

fn pair_tokens(
    pair: &EvalPair,
    index: usize,
    tokenizer: PairTokenizer,
) -> Result<(Vec<String>, Vec<String>), EvalError> {
    match tokenizer {
        PairTokenizer::Mode(mode) => Ok((
            tokenize(&pair.generated, mode),
            tokenize(&pair.reference, mode),
        )),
        PairTokenizer::Provided => match (&pair.generated_tokens, &pair.reference_tokens) {
            (Some(generated), Some(reference)) => Ok((generated.clone(), reference.clone())),
            _ => Err(EvalError::MissingProvidedTokens { index }),
        },
    }
}
