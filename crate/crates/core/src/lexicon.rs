//! Dictionary baselines: a signed-score lexicon, or positive and negative
//! word lists counted as +1 / -1. A document with no net score is left
//! unclassified and does not vote.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::SignalClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexiconKind {
    Scored,
    Wordlists,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub name: String,
    pub kind: LexiconKind,
    scores: BTreeMap<String, f64>,
}

/// A lexicon plus what loading it noticed.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedLexicon {
    pub lexicon: Lexicon,
    /// Terms listed more than once; the last entry wins.
    pub duplicates: Vec<String>,
    pub warnings: Vec<String>,
}

fn entries<R: BufRead>(source: R) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push((i + 1, t.to_string()));
    }
    Ok(out)
}

fn finish(
    name: &str,
    kind: LexiconKind,
    scores: BTreeMap<String, f64>,
    duplicates: Vec<String>,
) -> LoadedLexicon {
    let mut warnings = Vec::new();
    if scores.is_empty() {
        warnings.push(format!(
            "lexicon `{name}` is empty; every document will be unclassified"
        ));
    }
    if !duplicates.is_empty() {
        warnings.push(format!(
            "lexicon `{name}`: {} duplicate terms, last entry kept",
            duplicates.len()
        ));
    }
    LoadedLexicon {
        lexicon: Lexicon {
            name: name.to_string(),
            kind,
            scores,
        },
        duplicates,
        warnings,
    }
}

/// Reads `term<TAB>score` lines. Terms are lowercased.
pub fn load_scored<R: BufRead>(source: R, name: &str) -> Result<LoadedLexicon> {
    let mut scores = BTreeMap::new();
    let mut duplicates = Vec::new();
    for (line, text) in entries(source)? {
        let (term, score) = text.split_once('\t').ok_or_else(|| {
            Error::Lexicon(format!("{name} line {line}: expected `term<TAB>score`"))
        })?;
        let score: f64 = score
            .trim()
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| {
                Error::Lexicon(format!(
                    "{name} line {line}: unparseable score `{}`",
                    score.trim()
                ))
            })?;
        let term = term.trim().to_lowercase();
        if scores.insert(term.clone(), score).is_some() {
            duplicates.push(term);
        }
    }
    Ok(finish(name, LexiconKind::Scored, scores, duplicates))
}

/// Reads one word per line from each list. A word on both lists is an error.
pub fn load_wordlists<P: BufRead, N: BufRead>(
    positive: P,
    negative: N,
    name: &str,
) -> Result<LoadedLexicon> {
    let mut scores = BTreeMap::new();
    let mut duplicates = Vec::new();
    let pos: Vec<String> = entries(positive)?
        .into_iter()
        .map(|(_, w)| w.to_lowercase())
        .collect();
    let neg: Vec<String> = entries(negative)?
        .into_iter()
        .map(|(_, w)| w.to_lowercase())
        .collect();
    let overlap: Vec<&String> = neg.iter().filter(|w| pos.contains(w)).collect();
    if !overlap.is_empty() {
        let mut words: Vec<&str> = overlap.iter().map(|s| s.as_str()).collect();
        words.sort_unstable();
        words.dedup();
        return Err(Error::Lexicon(format!(
            "{name}: {} words on both lists: {}",
            words.len(),
            words.join(", ")
        )));
    }
    for (words, score) in [(pos, 1.0), (neg, -1.0)] {
        for w in words {
            if scores.insert(w.clone(), score).is_some() {
                duplicates.push(w);
            }
        }
    }
    Ok(finish(name, LexiconKind::Wordlists, scores, duplicates))
}

impl Lexicon {
    pub fn from_scores<I: IntoIterator<Item = (String, f64)>>(
        name: &str,
        kind: LexiconKind,
        scores: I,
    ) -> Self {
        Lexicon {
            name: name.to_string(),
            kind,
            scores: scores
                .into_iter()
                .map(|(t, s)| (t.to_lowercase(), s))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn score_of(&self, term: &str) -> Option<f64> {
        self.scores.get(term).copied()
    }

    /// Net score of the matched tokens, `None` when nothing matched.
    /// Matched scores are summed in sorted order so the result does not
    /// depend on token order.
    pub fn score<S: AsRef<str>>(&self, tokens: &[S]) -> Option<f64> {
        let mut hits: Vec<f64> = tokens
            .iter()
            .filter_map(|t| self.score_of(t.as_ref()))
            .collect();
        if hits.is_empty() {
            return None;
        }
        hits.sort_by(f64::total_cmp);
        Some(hits.iter().sum())
    }

    /// Buy for a positive net score, Sell for negative, `None` (unclassified)
    /// for zero or no matches.
    pub fn classify<S: AsRef<str>>(&self, tokens: &[S]) -> Option<SignalClass> {
        match self.score(tokens) {
            Some(s) if s > 0.0 => Some(SignalClass::Buy),
            Some(s) if s < 0.0 => Some(SignalClass::Sell),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fractions {
    pub buy: f64,
    pub sell: f64,
    pub unclassified: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkewReport {
    pub n: usize,
    pub buy: usize,
    pub sell: usize,
    pub unclassified: usize,
    pub over_all: Fractions,
    /// Buy and Sell shares of the classified documents; `None` if there are none.
    pub over_classified: Option<Fractions>,
}

pub fn skew_report(classes: &[Option<SignalClass>]) -> Result<SkewReport> {
    if classes.is_empty() {
        return Err(Error::Empty("classification batch"));
    }
    let buy = classes
        .iter()
        .filter(|c| **c == Some(SignalClass::Buy))
        .count();
    let sell = classes
        .iter()
        .filter(|c| **c == Some(SignalClass::Sell))
        .count();
    let n = classes.len();
    let unclassified = n - buy - sell;
    let classified = buy + sell;
    Ok(SkewReport {
        n,
        buy,
        sell,
        unclassified,
        over_all: Fractions {
            buy: buy as f64 / n as f64,
            sell: sell as f64 / n as f64,
            unclassified: unclassified as f64 / n as f64,
        },
        over_classified: (classified > 0).then(|| Fractions {
            buy: buy as f64 / classified as f64,
            sell: sell as f64 / classified as f64,
            unclassified: 0.0,
        }),
    })
}
