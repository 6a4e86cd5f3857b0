//! Tokenization for the overlap metrics.
//!
//! The default for metric computation is [`TokenizeMode::CjkChar`], which
//! treats every CJK codepoint as its own token and splits non-CJK runs on
//! whitespace. Scores computed this way are not comparable with scores from
//! word-segmented tokenizations; callers needing a specific segmentation can
//! pass pre-tokenized input through the `provided` path in
//! [`super::evaluate_model_outputs`].

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizeMode {
    /// Split on Unicode whitespace.
    Whitespace,
    /// Each CJK codepoint is a token; non-CJK runs split on whitespace.
    CjkChar,
}

/// True for codepoints tokenized one-per-character in CJK mode: Han
/// ideographs (including extensions), kana, CJK punctuation, and
/// fullwidth forms.
fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3000..=0x303F   // CJK symbols and punctuation
        | 0x3040..=0x30FF // hiragana, katakana
        | 0x3400..=0x4DBF // CJK extension A
        | 0x4E00..=0x9FFF // CJK unified ideographs
        | 0xF900..=0xFAFF // CJK compatibility ideographs
        | 0xFF00..=0xFFEF // halfwidth and fullwidth forms
        | 0x20000..=0x2A6DF // CJK extension B
    )
}

pub fn tokenize(text: &str, mode: TokenizeMode) -> Vec<String> {
    match mode {
        TokenizeMode::Whitespace => text.split_whitespace().map(str::to_string).collect(),
        TokenizeMode::CjkChar => {
            let mut tokens = Vec::new();
            let mut pending = String::new();
            for c in text.chars() {
                if c.is_whitespace() {
                    flush(&mut pending, &mut tokens);
                } else if is_cjk(c) {
                    flush(&mut pending, &mut tokens);
                    tokens.push(c.to_string());
                } else {
                    pending.push(c);
                }
            }
            flush(&mut pending, &mut tokens);
            tokens
        }
    }
}

fn flush(pending: &mut String, tokens: &mut Vec<String>) {
    if !pending.is_empty() {
        tokens.push(std::mem::take(pending));
    }
}
