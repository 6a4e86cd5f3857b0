//! Embedding-based similarity scoring with greedy max matching.
//!
//! Precision is the mean over candidate tokens of the best cosine match in
//! the reference; recall is the symmetric quantity; F is their harmonic
//! mean. No IDF weighting and no baseline rescaling are applied.
//!
//! Negative mean similarities (possible with arbitrary embeddings, where
//! every match is worse than orthogonal) are floored at zero so scores stay
//! in `[0, 1]` and the harmonic mean stays well-defined.

use super::EvalError;

/// Precision / recall / F for one candidate–reference pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BertScore {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let norm_a: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_b: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (norm_a * norm_b)
}

fn check_vectors(vectors: &[Vec<f64>], dim: usize) -> Result<(), EvalError> {
    for (index, vector) in vectors.iter().enumerate() {
        if vector.len() != dim {
            return Err(EvalError::DimensionMismatch {
                left: dim,
                right: vector.len(),
            });
        }
        if vector.iter().all(|x| *x == 0.0) {
            return Err(EvalError::ZeroVector { index });
        }
    }
    Ok(())
}

/// Greedy-matching embedding score over candidate and reference token
/// embeddings. Either side empty scores zero.
pub fn bert_score_f(
    candidate: &[Vec<f64>],
    reference: &[Vec<f64>],
) -> Result<BertScore, EvalError> {
    if candidate.is_empty() || reference.is_empty() {
        return Ok(BertScore::default());
    }
    let dim = candidate[0].len();
    check_vectors(candidate, dim)?;
    check_vectors(reference, dim)?;

    let similarity: Vec<Vec<f64>> = candidate
        .iter()
        .map(|c| reference.iter().map(|r| cosine(c, r)).collect())
        .collect();

    let precision = (similarity
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / candidate.len() as f64)
        .max(0.0);
    let recall = ((0..reference.len())
        .map(|j| {
            similarity
                .iter()
                .map(|row| row[j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / reference.len() as f64)
        .max(0.0);
    let f = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(BertScore {
        precision,
        recall,
        f,
    })
}
