//! Structural validation of transcripts.
//!
//! Validation is total: it never rejects input it cannot describe. Every
//! violation is reported, and reports for positional problems carry the
//! offending index.

use std::fmt;

use super::types::{CounselingCase, MultiTurnDialogue, Role, Utterance};

/// Which transcript contract applies.
///
/// Synthetic dialogues must start with the client and end with the
/// counselor. Counseling cases must start with the client but may end with
/// either role, since real transcripts vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranscriptKind {
    Synthetic,
    Case,
}

/// A single structural violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Two adjacent utterances share a role; `index` is the second one.
    Alternation { index: usize },
    /// The first utterance is not the client's.
    FirstRole { found: Role },
    /// The last utterance is not the counselor's (synthetic dialogues only).
    LastRole { found: Role },
    /// Utterance content is empty after trimming.
    EmptyContent { index: usize },
    /// The transcript is shorter than the required minimum.
    MinLength { len: usize, min: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Alternation { index } => {
                write!(f, "utterance {index} repeats the previous speaker's role")
            }
            Violation::FirstRole { found } => {
                write!(f, "first utterance must be the client's, found {found}")
            }
            Violation::LastRole { found } => {
                write!(f, "last utterance must be the counselor's, found {found}")
            }
            Violation::EmptyContent { index } => {
                write!(f, "utterance {index} has empty content")
            }
            Violation::MinLength { len, min } => {
                write!(f, "transcript has {len} utterances, minimum is {min}")
            }
        }
    }
}

/// Outcome of validating one transcript. Valid iff no violations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        let lines: Vec<String> = self.violations.iter().map(|v| format!("- {v}")).collect();
        f.write_str(&lines.join("\n"))
    }
}

/// Validates a transcript against the shared structural rules.
pub fn validate_transcript(
    transcript: &[Utterance],
    kind: TranscriptKind,
    min_len: usize,
) -> ValidationReport {
    let mut violations = Vec::new();

    if transcript.len() < min_len {
        violations.push(Violation::MinLength {
            len: transcript.len(),
            min: min_len,
        });
    }

    if let Some(first) = transcript.first() {
        if first.role != Role::Client {
            violations.push(Violation::FirstRole { found: first.role });
        }
    }
    if kind == TranscriptKind::Synthetic {
        if let Some(last) = transcript.last() {
            if last.role != Role::Counselor {
                violations.push(Violation::LastRole { found: last.role });
            }
        }
    }

    for pair in transcript.windows(2) {
        if pair[0].role == pair[1].role {
            violations.push(Violation::Alternation {
                index: pair[1].index,
            });
        }
    }

    for utterance in transcript {
        if utterance.content.trim().is_empty() {
            violations.push(Violation::EmptyContent {
                index: utterance.index,
            });
        }
    }

    ValidationReport { violations }
}

/// Validates a synthesized dialogue (client first, counselor last, ≥ 2 turns).
pub fn validate_dialogue(dialogue: &MultiTurnDialogue) -> ValidationReport {
    validate_transcript(&dialogue.transcript, TranscriptKind::Synthetic, 2)
}

/// Validates a real counseling case (client first, either role last, ≥ 2 turns).
pub fn validate_case(case: &CounselingCase) -> ValidationReport {
    validate_transcript(&case.transcript, TranscriptKind::Case, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::types::build_transcript;

    fn transcript(roles: &[Role]) -> Vec<Utterance> {
        build_transcript(roles.iter().map(|r| (*r, format!("message as {r}"))))
    }

    #[test]
    fn alternating_four_turn_transcript_is_valid() {
        let t = transcript(&[Role::Client, Role::Counselor, Role::Client, Role::Counselor]);
        let report = validate_transcript(&t, TranscriptKind::Synthetic, 2);
        assert!(report.is_valid());
    }

    #[test]
    fn adjacent_same_role_reports_alternation_index() {
        let t = transcript(&[Role::Client, Role::Client, Role::Counselor]);
        let report = validate_transcript(&t, TranscriptKind::Synthetic, 2);
        assert_eq!(report.violations, vec![Violation::Alternation { index: 1 }]);
    }

    #[test]
    fn synthetic_transcript_must_end_with_counselor() {
        let t = transcript(&[Role::Client, Role::Counselor, Role::Client]);
        let report = validate_transcript(&t, TranscriptKind::Synthetic, 2);
        assert_eq!(
            report.violations,
            vec![Violation::LastRole {
                found: Role::Client
            }]
        );
        // The same transcript is fine as a real case.
        let report = validate_transcript(&t, TranscriptKind::Case, 2);
        assert!(report.is_valid());
    }

    #[test]
    fn empty_content_and_min_length_reported() {
        let mut t = transcript(&[Role::Client, Role::Counselor]);
        t[1].content = "   ".to_string();
        let report = validate_transcript(&t, TranscriptKind::Synthetic, 4);
        assert_eq!(
            report.violations,
            vec![
                Violation::MinLength { len: 2, min: 4 },
                Violation::EmptyContent { index: 1 },
            ]
        );
    }

    #[test]
    fn empty_transcript_reports_only_min_length() {
        let report = validate_transcript(&[], TranscriptKind::Synthetic, 2);
        assert_eq!(
            report.violations,
            vec![Violation::MinLength { len: 0, min: 2 }]
        );
    }
}
