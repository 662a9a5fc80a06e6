//! Price-based ground truth.
//!
//! A tweet posted at exchange time `t` is labelled Buy when the close at
//! `t + 60m` is above the close at `t`, Sell when below. Tweets whose
//! one-hour look-back or look-ahead leaves the session, tweets outside market
//! hours or on non-trading days, and unchanged prices are skipped rather than
//! extrapolated.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{MinuteBar, TradingCalendar, Tweet, SESSION_CLOSE, SESSION_OPEN};
use crate::money::Usd;
use crate::rng::SplitMix64;
use crate::tokenizer::tokenize;

pub const HORIZON_MINUTES: i64 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SignalClass {
    Buy,
    Sell,
}

impl SignalClass {
    pub fn is_buy(self) -> bool {
        self == SignalClass::Buy
    }

    /// +1 for Buy, -1 for Sell.
    pub fn sign(self) -> f64 {
        match self {
            SignalClass::Buy => 1.0,
            SignalClass::Sell => -1.0,
        }
    }
}

impl fmt::Display for SignalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalClass::Buy => "Buy",
            SignalClass::Sell => "Sell",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkipReason {
    NonTradingDay,
    OutsideMarketHours,
    PriorHourBeforeOpen,
    ExitAfterClose,
    MissingData,
    NoPriceChange,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SkipReason::NonTradingDay => "non-trading-day",
            SkipReason::OutsideMarketHours => "outside-market-hours",
            SkipReason::PriorHourBeforeOpen => "prior-hour-before-open",
            SkipReason::ExitAfterClose => "exit-after-close",
            SkipReason::MissingData => "missing-data",
            SkipReason::NoPriceChange => "no-price-change",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDocument {
    pub tweet_id: String,
    pub ticker: String,
    /// Exchange-local time of the tweet.
    pub timestamp: NaiveDateTime,
    pub tokens: Vec<String>,
    pub label: SignalClass,
    pub price_before: Usd,
    pub price_at: Usd,
    pub price_after: Usd,
    pub prior_trend: u8,
    pub hour_volume: u64,
    pub volume_high: u8,
    pub weekday: u8,
}

impl LabeledDocument {
    pub fn context(&self) -> StockContext {
        StockContext {
            price_before: self.price_before,
            prior_trend: self.prior_trend,
            hour_volume: self.hour_volume,
            volume_high: self.volume_high,
            weekday: self.weekday,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceLookupError {
    OutsideSession,
    NoData,
}

/// Minute bars of one ticker with the calendar they imply.
#[derive(Debug, Clone)]
pub struct PriceSeries {
    bars: Vec<MinuteBar>,
    calendar: TradingCalendar,
}

impl PriceSeries {
    /// `bars` must be strictly increasing in time, as produced by `parse_bars`.
    pub fn new(bars: Vec<MinuteBar>) -> Self {
        let calendar = TradingCalendar::from_bars(&bars);
        PriceSeries { bars, calendar }
    }

    pub fn bars(&self) -> &[MinuteBar] {
        &self.bars
    }

    pub fn calendar(&self) -> &TradingCalendar {
        &self.calendar
    }

    fn floor_minute(t: &NaiveDateTime) -> NaiveDateTime {
        t.with_second(0)
            .and_then(|t| t.with_nanosecond(0))
            .expect("valid time")
    }

    /// Close of the bar at `instant`'s minute, or of the latest earlier bar
    /// in the same session.
    pub fn price_at(&self, instant: &NaiveDateTime) -> std::result::Result<Usd, PriceLookupError> {
        if !self.calendar.in_session(instant) {
            return Err(PriceLookupError::OutsideSession);
        }
        let minute = Self::floor_minute(instant);
        let idx = self.bars.partition_point(|b| b.timestamp <= minute);
        match idx.checked_sub(1).map(|i| &self.bars[i]) {
            Some(bar) if bar.timestamp.date() == instant.date() => Ok(bar.close),
            _ => Err(PriceLookupError::NoData),
        }
    }

    /// Total volume of bars stamped in `[from, to)`, with the number of bars seen.
    pub fn volume_between(&self, from: &NaiveDateTime, to: &NaiveDateTime) -> (u64, usize) {
        let lo = self.bars.partition_point(|b| b.timestamp < *from);
        let hi = self.bars.partition_point(|b| b.timestamp < *to);
        let slice = &self.bars[lo..hi.max(lo)];
        (slice.iter().map(|b| b.volume).sum(), slice.len())
    }

    /// Highest bar high within `[start, end]` dates.
    pub fn max_high(&self, start: NaiveDate, end: NaiveDate) -> Option<Usd> {
        self.bars
            .iter()
            .filter(|b| (start..=end).contains(&b.timestamp.date()))
            .map(|b| b.high)
            .max()
    }

    /// Last close of each trading day in `[start, end]`.
    pub fn daily_closes(&self, start: NaiveDate, end: NaiveDate) -> Vec<(NaiveDate, Usd)> {
        let mut out: Vec<(NaiveDate, Usd)> = Vec::new();
        for b in self
            .bars
            .iter()
            .filter(|b| (start..=end).contains(&b.timestamp.date()))
        {
            let d = b.timestamp.date();
            match out.last_mut() {
                Some((day, close)) if *day == d => *close = b.close,
                _ => out.push((d, b.close)),
            }
        }
        out
    }
}

/// Checks the session rules for a one-hour look-back and look-ahead around `t`.
pub fn window_check(
    calendar: &TradingCalendar,
    t: &NaiveDateTime,
) -> std::result::Result<(), SkipReason> {
    if !calendar.is_trading_day(t.date()) {
        return Err(SkipReason::NonTradingDay);
    }
    let time = t.time();
    if time < SESSION_OPEN || time > SESSION_CLOSE {
        return Err(SkipReason::OutsideMarketHours);
    }
    let horizon = Duration::minutes(HORIZON_MINUTES);
    if (*t - horizon).time() < SESSION_OPEN || (*t - horizon).date() != t.date() {
        return Err(SkipReason::PriorHourBeforeOpen);
    }
    if (*t + horizon).time() > SESSION_CLOSE || (*t + horizon).date() != t.date() {
        return Err(SkipReason::ExitAfterClose);
    }
    Ok(())
}

/// Labels one tweet against the ticker's bars. Context fields are left zero;
/// see [`attach_context`].
pub fn label_tweet(
    tweet: &Tweet,
    ticker: &str,
    series: &PriceSeries,
) -> std::result::Result<LabeledDocument, SkipReason> {
    let t = tweet.local_time();
    window_check(series.calendar(), &t)?;
    let horizon = Duration::minutes(HORIZON_MINUTES);
    let lookup = |i: NaiveDateTime| series.price_at(&i).map_err(|_| SkipReason::MissingData);
    let price_before = lookup(t - horizon)?;
    let price_at = lookup(t)?;
    let price_after = lookup(t + horizon)?;
    let label = match price_after.cmp(&price_at) {
        std::cmp::Ordering::Greater => SignalClass::Buy,
        std::cmp::Ordering::Less => SignalClass::Sell,
        std::cmp::Ordering::Equal => return Err(SkipReason::NoPriceChange),
    };
    Ok(LabeledDocument {
        tweet_id: tweet.id.clone(),
        ticker: ticker.to_ascii_uppercase(),
        timestamp: t,
        tokens: tokenize(&tweet.text),
        label,
        price_before,
        price_at,
        price_after,
        prior_trend: 0,
        hour_volume: 0,
        volume_high: 0,
        weekday: t.weekday().num_days_from_monday() as u8,
    })
}

/// Shares traded in the hour before `t`, or `None` when no bar falls in it.
pub fn hour_volume(series: &PriceSeries, t: &NaiveDateTime) -> Option<u64> {
    let (volume, n) = series.volume_between(&(*t - Duration::minutes(HORIZON_MINUTES)), t);
    (n > 0).then_some(volume)
}

/// Fills the quantitative context: prior-hour trend, prior-hour volume and
/// its comparison with the training mean, and the weekday.
pub fn attach_context(
    mut doc: LabeledDocument,
    series: &PriceSeries,
    training_mean_hour_volume: f64,
) -> std::result::Result<LabeledDocument, SkipReason> {
    let ctx = StockContext::at(series, &doc.timestamp, training_mean_hour_volume)
        .ok_or(SkipReason::MissingData)?;
    doc.price_before = ctx.price_before;
    doc.prior_trend = ctx.prior_trend;
    doc.hour_volume = ctx.hour_volume;
    doc.volume_high = ctx.volume_high;
    doc.weekday = ctx.weekday;
    Ok(doc)
}

/// Context features computable at time `t` from bars up to `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StockContext {
    pub price_before: Usd,
    pub prior_trend: u8,
    pub hour_volume: u64,
    pub volume_high: u8,
    pub weekday: u8,
}

impl StockContext {
    /// `None` when the look-back hour cannot be priced or holds no bars.
    pub fn at(series: &PriceSeries, t: &NaiveDateTime, mean_hour_volume: f64) -> Option<Self> {
        let before = series
            .price_at(&(*t - Duration::minutes(HORIZON_MINUTES)))
            .ok()?;
        let now = series.price_at(t).ok()?;
        let volume = hour_volume(series, t)?;
        Some(StockContext {
            price_before: before,
            prior_trend: u8::from(now > before),
            hour_volume: volume,
            volume_high: u8::from(volume as f64 > mean_hour_volume),
            weekday: t.weekday().num_days_from_monday() as u8,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct LabelingOutcome {
    pub docs: Vec<LabeledDocument>,
    pub skipped: BTreeMap<SkipReason, usize>,
}

/// Labels every tweet for one ticker, counting skips by reason. Output is
/// sorted by timestamp, then tweet id.
pub fn label_all<'a, I>(tweets: I, ticker: &str, series: &PriceSeries) -> LabelingOutcome
where
    I: IntoIterator<Item = &'a Tweet>,
{
    let mut out = LabelingOutcome::default();
    for tweet in tweets {
        match label_tweet(tweet, ticker, series) {
            Ok(doc) => out.docs.push(doc),
            Err(reason) => *out.skipped.entry(reason).or_insert(0) += 1,
        }
    }
    out.docs.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then_with(|| a.tweet_id.cmp(&b.tweet_id))
    });
    out
}

/// Labels tweets and fills their context. The volume flag compares with the
/// mean over all labeled documents; training recomputes it on its own split.
/// Documents whose context cannot be computed count as missing data.
pub fn label_with_context<'a, I>(tweets: I, ticker: &str, series: &PriceSeries) -> LabelingOutcome
where
    I: IntoIterator<Item = &'a Tweet>,
{
    let mut out = label_all(tweets, ticker, series);
    for doc in &mut out.docs {
        doc.hour_volume = hour_volume(series, &doc.timestamp).unwrap_or(0);
    }
    let mean = mean_hour_volume(&out.docs);
    let docs = std::mem::take(&mut out.docs);
    for doc in docs {
        match attach_context(doc, series, mean) {
            Ok(d) => out.docs.push(d),
            Err(reason) => *out.skipped.entry(reason).or_insert(0) += 1,
        }
    }
    out
}

/// Inclusive date range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        DateRange { start, end }
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        d >= self.start && d <= self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<LabeledDocument>,
    pub validation: Vec<LabeledDocument>,
    pub test: Vec<LabeledDocument>,
    pub seed: u64,
}

/// Routes documents inside `test_period` to the test set and splits the rest
/// `train_frac` / `1 - train_frac` after a seeded shuffle.
pub fn split(
    docs: &[LabeledDocument],
    train_frac: f64,
    seed: u64,
    test_period: Option<DateRange>,
) -> Result<DatasetSplit> {
    if !(0.0..=1.0).contains(&train_frac) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_frac} not in [0, 1]"
        )));
    }
    let (test, mut pool): (Vec<_>, Vec<_>) = docs
        .iter()
        .cloned()
        .partition(|d| test_period.is_some_and(|p| p.contains(d.timestamp.date())));
    if pool.is_empty() {
        return Err(Error::Empty("no documents outside the test period"));
    }
    SplitMix64::new(seed).shuffle(&mut pool);
    let n_train = (pool.len() as f64 * train_frac).round() as usize;
    let validation = pool.split_off(n_train);
    Ok(DatasetSplit {
        train: pool,
        validation,
        test,
        seed,
    })
}

/// Mean prior-hour volume over a set of documents; 0 for none.
pub fn mean_hour_volume(docs: &[LabeledDocument]) -> f64 {
    if docs.is_empty() {
        0.0
    } else {
        docs.iter().map(|d| d.hour_volume as f64).sum::<f64>() / docs.len() as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemporalDistribution {
    pub by_hour: BTreeMap<u32, (usize, usize)>,
    pub by_weekday: BTreeMap<u32, (usize, usize)>,
}

pub fn temporal_distribution(docs: &[LabeledDocument]) -> TemporalDistribution {
    let mut out = TemporalDistribution::default();
    for d in docs {
        let bump = |slot: &mut (usize, usize)| match d.label {
            SignalClass::Buy => slot.0 += 1,
            SignalClass::Sell => slot.1 += 1,
        };
        bump(out.by_hour.entry(d.timestamp.hour()).or_default());
        bump(
            out.by_weekday
                .entry(d.timestamp.weekday().num_days_from_monday())
                .or_default(),
        );
    }
    out
}

/// `key,buy,sell` histogram rows.
pub fn write_histogram_csv<W: Write>(
    mut sink: W,
    counts: &BTreeMap<u32, (usize, usize)>,
) -> Result<()> {
    writeln!(sink, "key,buy,sell")?;
    for (k, (b, s)) in counts {
        writeln!(sink, "{k},{b},{s}")?;
    }
    Ok(())
}

pub fn write_labeled<W: Write>(mut sink: W, docs: &[LabeledDocument]) -> Result<()> {
    for d in docs {
        serde_json::to_writer(&mut sink, d)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads JSON Lines written by [`write_labeled`]; `#` lines are skipped.
pub fn read_labeled<R: BufRead>(source: R) -> Result<Vec<LabeledDocument>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(serde_json::from_str(t).map_err(|e| Error::row(i + 1, e.to_string()))?);
    }
    Ok(out)
}
