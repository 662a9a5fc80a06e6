//! Tweet and minute-bar ingestion, cashtag spam filtering and per-stock selection.

mod bars;
pub mod calendar;

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::sync::LazyLock;

use chrono::{DateTime, NaiveDateTime, SubsecRound, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bars::{parse_bars, serialize_bars, MinuteBar};
pub use calendar::{eastern_to_utc, utc_to_eastern, TradingCalendar, SESSION_CLOSE, SESSION_OPEN};

/// Default spam threshold: tweets with more cashtags than this are dropped.
pub const DEFAULT_MAX_CASHTAGS: usize = 2;

/// Fraction of malformed lines tolerated before a tweet file is rejected.
pub const MAX_MALFORMED_FRACTION: f64 = 0.10;

static CASHTAG: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:^|[^\w$])\$([A-Za-z]{1,5})\b").expect("cashtag regex"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tweet {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    #[serde(skip)]
    pub cashtags: BTreeSet<String>,
}

impl Tweet {
    pub fn new(id: impl Into<String>, timestamp: DateTime<Utc>, text: impl Into<String>) -> Self {
        let text = text.into();
        Tweet {
            id: id.into(),
            timestamp: timestamp.trunc_subsecs(0),
            cashtags: extract_cashtags(&text),
            text,
        }
    }

    /// Timestamp on the exchange clock.
    pub fn local_time(&self) -> NaiveDateTime {
        utc_to_eastern(&self.timestamp)
    }
}

/// Distinct `$TICKER` symbols in `text`, upper-cased.
pub fn extract_cashtags(text: &str) -> BTreeSet<String> {
    CASHTAG
        .captures_iter(text)
        .map(|c| c[1].to_ascii_uppercase())
        .collect()
}

#[derive(Deserialize)]
struct RawTweet {
    id: String,
    timestamp: String,
    text: String,
}

fn parse_timestamp(s: &str) -> std::result::Result<DateTime<Utc>, String> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.with_timezone(&Utc));
    }
    // A bare timestamp without offset is read as UTC.
    NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
        .map(|n| n.and_utc())
        .map_err(|e| format!("bad timestamp `{s}`: {e}"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedTweets {
    pub tweets: Vec<Tweet>,
    pub errors: Vec<LineError>,
}

/// Reads JSON Lines tweets. Blank lines and lines starting with `#` are skipped.
///
/// Malformed lines are collected, not fatal, unless they exceed 10% of the
/// non-blank lines and there is more than one of them.
pub fn parse_tweets<R: BufRead>(source: R) -> Result<ParsedTweets> {
    let mut out = ParsedTweets::default();
    let mut total = 0usize;
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        total += 1;
        let line_no = idx + 1;
        let parsed = serde_json::from_str::<RawTweet>(trimmed)
            .map_err(|e| e.to_string())
            .and_then(|raw| {
                let ts = parse_timestamp(&raw.timestamp)?;
                Ok(Tweet::new(raw.id, ts, raw.text))
            });
        match parsed {
            Ok(t) => out.tweets.push(t),
            Err(message) => out.errors.push(LineError {
                line: line_no,
                message,
            }),
        }
    }
    let failed = out.errors.len();
    if failed > 1 && failed as f64 > MAX_MALFORMED_FRACTION * total as f64 {
        let first = &out.errors[0];
        return Err(Error::TooManyMalformed {
            failed,
            total,
            first_line: first.line,
            first_message: first.message.clone(),
        });
    }
    Ok(out)
}

/// Writes tweets as JSON Lines with the `id`, `timestamp`, `text` fields.
pub fn write_tweets<W: Write>(mut sink: W, tweets: &[Tweet]) -> Result<()> {
    for t in tweets {
        serde_json::to_writer(&mut sink, t)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct SpamFilterOutcome {
    pub kept: Vec<Tweet>,
    pub removed: usize,
    pub total: usize,
}

impl SpamFilterOutcome {
    pub fn removal_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.removed as f64 / self.total as f64
        }
    }
}

/// Drops tweets that tag more than `max_cashtags` distinct tickers.
pub fn spam_filter(tweets: Vec<Tweet>, max_cashtags: usize) -> SpamFilterOutcome {
    let total = tweets.len();
    let kept: Vec<Tweet> = tweets
        .into_iter()
        .filter(|t| t.cashtags.len() <= max_cashtags)
        .collect();
    SpamFilterOutcome {
        removed: total - kept.len(),
        kept,
        total,
    }
}

pub fn select_for_stock<'a>(tweets: &'a [Tweet], ticker: &str) -> Vec<&'a Tweet> {
    let ticker = ticker.to_ascii_uppercase();
    tweets
        .iter()
        .filter(|t| t.cashtags.contains(&ticker))
        .collect()
}
