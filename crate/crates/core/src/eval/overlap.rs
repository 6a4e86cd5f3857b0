//! N-gram and LCS overlap metrics.

use std::collections::HashMap;

/// Precision / recall / F1 triple returned by the overlap metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OverlapScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl OverlapScore {
    fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        OverlapScore {
            precision,
            recall,
            f1,
        }
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n >= 1 && tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram overlap between candidate and reference.
fn clipped_overlap(candidate: &[String], reference: &[String], n: usize) -> usize {
    let cand = ngram_counts(candidate, n);
    let reference = ngram_counts(reference, n);
    cand.iter()
        .map(|(gram, count)| (*count).min(reference.get(gram).copied().unwrap_or(0)))
        .sum()
}

/// ROUGE-N: clipped n-gram precision/recall/F1. Returns zeros when either
/// side has no n-grams.
pub fn rouge_n(candidate: &[String], reference: &[String], n: usize) -> OverlapScore {
    assert!(n >= 1, "n must be at least 1");
    let cand_total = candidate.len().saturating_sub(n - 1);
    let ref_total = reference.len().saturating_sub(n - 1);
    if candidate.len() < n || reference.len() < n {
        return OverlapScore::default();
    }
    let overlap = clipped_overlap(candidate, reference, n) as f64;
    OverlapScore::from_pr(overlap / cand_total as f64, overlap / ref_total as f64)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    // One-row DP over b.
    let mut row = vec![0usize; b.len() + 1];
    for item in a {
        let mut diagonal = 0;
        for (j, other) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if item == other {
                diagonal + 1
            } else {
                row[j + 1].max(row[j])
            };
            diagonal = up;
        }
    }
    row[b.len()]
}

/// ROUGE-L: longest-common-subsequence precision/recall/F1 (β = 1).
pub fn rouge_l(candidate: &[String], reference: &[String]) -> OverlapScore {
    if candidate.is_empty() || reference.is_empty() {
        return OverlapScore::default();
    }
    let lcs = lcs_len(candidate, reference) as f64;
    OverlapScore::from_pr(lcs / candidate.len() as f64, lcs / reference.len() as f64)
}

/// ROUGE-L with the classical recall-weighted F measure:
/// F = (1 + β²)·P·R / (R + β²·P). [`rouge_l`] is the β = 1 special case.
pub fn rouge_l_weighted(candidate: &[String], reference: &[String], beta: f64) -> OverlapScore {
    let base = rouge_l(candidate, reference);
    let (p, r) = (base.precision, base.recall);
    let denominator = r + beta * beta * p;
    let f1 = if denominator > 0.0 {
        (1.0 + beta * beta) * p * r / denominator
    } else {
        0.0
    };
    OverlapScore {
        precision: p,
        recall: r,
        f1,
    }
}

/// Sentence-level BLEU-4 in `[0, 1]`.
///
/// Conventions:
/// * modified (clipped) n-gram precisions, uniform weights over
///   n = 1..=min(4, |candidate|) (effective order for short candidates);
/// * smoothing for n ≥ 2: a zero match count is replaced by 1/2, i.e.
///   p_n = 1 / (2 · |candidate n-grams|);
/// * a zero unigram match yields 0 outright;
/// * brevity penalty min(1, exp(1 − |reference| / |candidate|));
/// * empty candidate yields 0.
pub fn bleu4(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    let max_order = candidate.len().min(4);
    let mut log_sum = 0.0;
    for n in 1..=max_order {
        let total = candidate.len() - n + 1;
        let matches = clipped_overlap(candidate, reference, n);
        let precision = if matches > 0 {
            matches as f64 / total as f64
        } else if n == 1 {
            return 0.0;
        } else {
            0.5 / total as f64
        };
        log_sum += precision.ln() / max_order as f64;
    }
    let brevity = if candidate.len() >= reference.len() {
        1.0
    } else {
        (1.0 - reference.len() as f64 / candidate.len() as f64).exp()
    };
    brevity * log_sum.exp()
}
