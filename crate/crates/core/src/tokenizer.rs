//! Tweet tokenizer.
//!
//! Steps, in order:
//! 1. URLs (`http://`, `https://` or `www.` followed by non-space) become `<url>`.
//! 2. Lowercase. Letters with no lowercase form (such as mathematical
//!    capitals) are dropped.
//! 3. Split on whitespace and delete punctuation and symbol characters
//!    (Unicode general categories P and S). `$aapl` becomes `aapl`, `don't`
//!    becomes `dont`.
//! 4. Runs of three or more identical letters shrink to two.
//! 5. Tokens made only of digits are dropped.
//!
//! No stemming, no stop-word list, no part-of-speech tagging.

use std::sync::LazyLock;

use regex::Regex;

pub const URL_TAG: &str = "<url>";

static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S+").expect("url regex"));
static PUNCT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[\p{P}\p{S}]").expect("punctuation regex"));

pub fn tokenize(text: &str) -> Vec<String> {
    let tagged = URL.replace_all(text, " <url> ");
    let lower: String = tagged
        .to_lowercase()
        .chars()
        .filter(|c| !c.is_uppercase())
        .collect();
    lower
        .split_whitespace()
        .filter_map(|raw| {
            if raw == URL_TAG {
                return Some(URL_TAG.to_string());
            }
            let stripped = PUNCT.replace_all(raw, "");
            let token = squeeze_repeats(&stripped);
            if token.is_empty() || token.chars().all(char::is_numeric) {
                None
            } else {
                Some(token)
            }
        })
        .collect()
}

/// Keeps at most two consecutive copies of the same alphabetic character.
fn squeeze_repeats(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut prev: Option<char> = None;
    let mut run = 0usize;
    for c in s.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= 2 || !c.is_alphabetic() {
            out.push(c);
        }
    }
    out
}
