//! Fleiss' kappa: chance-corrected agreement among a fixed number of raters
//! over categorical ratings.

use super::EvalError;

/// An items × categories matrix of rating counts. Cell (i, j) is the number
/// of raters who assigned item i to category j; every row sums to the same
/// rater count n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingMatrix {
    counts: Vec<Vec<u32>>,
    raters: u32,
}

impl RatingMatrix {
    pub fn new(counts: Vec<Vec<u32>>) -> Result<Self, EvalError> {
        if counts.len() < 2 {
            return Err(EvalError::InvalidRatings(format!(
                "need at least 2 items, got {}",
                counts.len()
            )));
        }
        let categories = counts[0].len();
        if categories == 0 {
            return Err(EvalError::InvalidRatings(
                "rows must have at least one category".to_string(),
            ));
        }
        let raters: u32 = counts[0].iter().sum();
        if raters < 2 {
            return Err(EvalError::InvalidRatings(format!(
                "need at least 2 raters, got {raters}"
            )));
        }
        for (index, row) in counts.iter().enumerate() {
            if row.len() != categories {
                return Err(EvalError::InvalidRatings(format!(
                    "row {index} has {} categories, expected {categories}",
                    row.len()
                )));
            }
            let sum: u32 = row.iter().sum();
            if sum != raters {
                return Err(EvalError::InvalidRatings(format!(
                    "row {index} sums to {sum}, expected {raters}"
                )));
            }
        }
        Ok(RatingMatrix { counts, raters })
    }

    pub fn item_count(&self) -> usize {
        self.counts.len()
    }

    pub fn category_count(&self) -> usize {
        self.counts[0].len()
    }

    pub fn raters(&self) -> u32 {
        self.raters
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.counts
    }
}

/// κ = (P̄ − P̄e) / (1 − P̄e), with per-item agreement
/// P_i = (Σ_j n_ij² − n) / (n(n−1)) and category shares
/// p_j = Σ_i n_ij / (N·n).
///
/// When chance agreement P̄e is 1 (all mass in one category), observed
/// agreement is necessarily 1 too and κ is defined as 1; any other case is
/// flagged defensively rather than dividing by zero.
pub fn fleiss_kappa(matrix: &RatingMatrix) -> Result<f64, EvalError> {
    let n = matrix.raters as f64;
    let items = matrix.item_count() as f64;

    let observed = matrix
        .rows()
        .iter()
        .map(|row| {
            let squares: f64 = row.iter().map(|&c| (c as f64) * (c as f64)).sum();
            (squares - n) / (n * (n - 1.0))
        })
        .sum::<f64>()
        / items;

    let expected = (0..matrix.category_count())
        .map(|j| {
            let share = matrix.rows().iter().map(|row| row[j] as f64).sum::<f64>() / (items * n);
            share * share
        })
        .sum::<f64>();

    if (1.0 - expected).abs() < 1e-12 {
        if (1.0 - observed).abs() < 1e-9 {
            return Ok(1.0);
        }
        return Err(EvalError::DegenerateAgreement { observed });
    }
    Ok((observed - expected) / (1.0 - expected))
}
