//! Majority voting over per-rater selections, with tie detection and
//! agreement against a designated reference choice.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// All raters' selections for one item, plus the reference choice the
/// agreement fraction is computed against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemVotes {
    pub item: String,
    /// rater name → selected option.
    pub votes: BTreeMap<String, String>,
    pub reference: String,
}

/// Per-item winners plus the fraction of items whose winner equals the
/// reference choice. A modal tie yields no winner and never counts toward
/// the agreement numerator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoteOutcome {
    pub winners: Vec<(String, Option<String>)>,
    pub agreement: f64,
}

pub fn majority_vote(items: &[ItemVotes]) -> Result<VoteOutcome, EvalError> {
    if items.is_empty() {
        return Err(EvalError::EmptyVotes);
    }

    // Every item must carry a rating from every rater seen anywhere.
    let mut raters: Vec<&String> = items.iter().flat_map(|i| i.votes.keys()).collect();
    raters.sort();
    raters.dedup();
    for item in items {
        for rater in &raters {
            if !item.votes.contains_key(*rater) {
                return Err(EvalError::MissingRating {
                    item: item.item.clone(),
                    rater: (*rater).clone(),
                });
            }
        }
    }

    let mut winners = Vec::with_capacity(items.len());
    let mut matches = 0usize;
    for item in items {
        let mut tally: BTreeMap<&String, usize> = BTreeMap::new();
        for choice in item.votes.values() {
            *tally.entry(choice).or_insert(0) += 1;
        }
        let best = tally.values().copied().max().unwrap_or(0);
        let modal: Vec<&String> = tally
            .iter()
            .filter(|(_, count)| **count == best)
            .map(|(choice, _)| *choice)
            .collect();
        let winner = if modal.len() == 1 {
            Some(modal[0].clone())
        } else {
            None
        };
        if winner.as_deref() == Some(item.reference.as_str()) {
            matches += 1;
        }
        winners.push((item.item.clone(), winner));
    }

    Ok(VoteOutcome {
        agreement: matches as f64 / items.len() as f64,
        winners,
    })
}
