//! Parsing provider output into speaker-labeled transcripts.

use thiserror::Error;

use crate::corpus::{Role, Utterance};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TranscriptError {
    #[error("no speaker labels found in the text")]
    NoLabelsFound,

    #[error("unlabeled content at line {line} before the first speaker label")]
    DanglingUnlabeledPrefix { line: usize },
}

/// Speaker labels recognized while parsing. The defaults cover English and
/// Chinese labels; both ASCII and fullwidth colons are accepted.
#[derive(Debug, Clone)]
pub struct LabelLexicon {
    client: Vec<String>,
    counselor: Vec<String>,
}

impl Default for LabelLexicon {
    fn default() -> Self {
        LabelLexicon {
            client: ["client", "来访者", "求助者"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            counselor: ["counselor", "counsellor", "心理咨询师", "咨询师"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl LabelLexicon {
    pub fn new(client: Vec<String>, counselor: Vec<String>) -> Self {
        LabelLexicon { client, counselor }
    }

    /// Matches `label:` / `label：` at the start of a line, longest label
    /// first, ASCII case-insensitive.
    fn match_label<'a>(&self, line: &'a str) -> Option<(Role, &'a str)> {
        let mut candidates: Vec<(Role, &str)> = self
            .client
            .iter()
            .map(|l| (Role::Client, l.as_str()))
            .chain(self.counselor.iter().map(|l| (Role::Counselor, l.as_str())))
            .collect();
        candidates.sort_by_key(|(_, label)| std::cmp::Reverse(label.len()));
        for (role, label) in candidates {
            if line.len() >= label.len()
                && line.is_char_boundary(label.len())
                && line[..label.len()].eq_ignore_ascii_case(label)
            {
                let rest = line[label.len()..].trim_start();
                if let Some(content) = rest.strip_prefix(':').or_else(|| rest.strip_prefix('：')) {
                    return Some((role, content.trim_start()));
                }
            }
        }
        None
    }
}

/// Parses speaker-labeled lines into utterances.
///
/// Consecutive lines with the same role merge into one utterance, joined by
/// newlines; unlabeled lines continue the current utterance. Text with no
/// labels at all, or with content before the first label, is rejected.
pub fn parse_transcript(
    text: &str,
    lexicon: &LabelLexicon,
) -> Result<Vec<Utterance>, TranscriptError> {
    // (role, content) runs before merging.
    let mut runs: Vec<(Role, String)> = Vec::new();
    let mut any_label = false;

    for (line_no, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        match lexicon.match_label(line) {
            Some((role, content)) => {
                any_label = true;
                match runs.last_mut() {
                    Some((last_role, last_content)) if *last_role == role => {
                        if !content.is_empty() {
                            if !last_content.is_empty() {
                                last_content.push('\n');
                            }
                            last_content.push_str(content);
                        }
                    }
                    _ => runs.push((role, content.to_string())),
                }
            }
            None => match runs.last_mut() {
                Some((_, last_content)) => {
                    if !last_content.is_empty() {
                        last_content.push('\n');
                    }
                    last_content.push_str(line);
                }
                None => {
                    if text_has_label(text, lexicon) {
                        return Err(TranscriptError::DanglingUnlabeledPrefix { line: line_no });
                    }
                    return Err(TranscriptError::NoLabelsFound);
                }
            },
        }
    }

    if !any_label {
        return Err(TranscriptError::NoLabelsFound);
    }

    Ok(runs
        .into_iter()
        .enumerate()
        .map(|(index, (role, content))| Utterance {
            role,
            content,
            index,
        })
        .collect())
}

fn text_has_label(text: &str, lexicon: &LabelLexicon) -> bool {
    text.lines()
        .any(|line| lexicon.match_label(line.trim()).is_some())
}
