//! Synthetic tweets and minute bars with planted word/price correlations.
//!
//! Each trading session is cut into hourly segments. The price level of the
//! segment that starts at `h:01` moves up or down from the previous one by a
//! jump that is always larger than the within-segment noise, so the
//! one-hour-ahead label of any tweet posted at `h:01..h:59` equals the
//! direction of segment `h + 1`. Tweets in hour `h` carry one planted word;
//! with probability `signal_strength` it comes from the list matching that
//! direction, otherwise from the opposite list.
//!
//! All randomness comes from one `SplitMix64` stream seeded by the spec, so
//! output is reproducible byte for byte.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{
    calendar::is_weekend, eastern_to_utc, serialize_bars, write_tweets, MinuteBar, Tweet,
    SESSION_OPEN,
};
use crate::labeler::SignalClass;
use crate::money::Usd;
use crate::rng::SplitMix64;

/// First and last hour that receive tweets; hour `h` predicts segment `h + 1`.
pub const TWEET_HOURS: std::ops::RangeInclusive<u32> = 9..=14;
/// Hours whose segments start with a jump at `h:01`.
const JUMP_HOURS: std::ops::RangeInclusive<u32> = 10..=15;
const NOISE_FRACTION: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub seed: u64,
    pub ticker: String,
    pub n_tweets: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub n_buy_words: usize,
    pub n_sell_words: usize,
    pub n_noise_words: usize,
    /// Noise words per tweet are drawn uniformly from this inclusive range.
    pub noise_per_tweet: (usize, usize),
    /// Noise words follow a rank-frequency law with this exponent; 0 is uniform.
    pub noise_zipf_exponent: f64,
    /// Probability that a tweet's planted word matches the next move.
    pub signal_strength: f64,
    /// Typical hourly move as a fraction of price.
    pub volatility: f64,
    /// Probability that an hourly move is up.
    pub up_probability: f64,
    /// Before this date the planted lists swap roles.
    pub flip_date: Option<NaiveDate>,
    pub start_price: Usd,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 42,
            ticker: "SYN".into(),
            n_tweets: 20_000,
            start: NaiveDate::from_ymd_opt(2016, 1, 1).expect("date"),
            end: NaiveDate::from_ymd_opt(2016, 12, 31).expect("date"),
            n_buy_words: 25,
            n_sell_words: 25,
            n_noise_words: 5000,
            noise_per_tweet: (3, 8),
            noise_zipf_exponent: 1.0,
            signal_strength: 0.7,
            volatility: 0.004,
            up_probability: 0.5,
            flip_date: None,
            start_price: Usd::from_dollars(100),
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_tweets == 0 {
            return bad("n_tweets must be positive".into());
        }
        if self.n_buy_words == 0 || self.n_sell_words == 0 {
            return bad("both planted word lists need at least one word".into());
        }
        if self.n_noise_words == 0 && self.noise_per_tweet.1 > 0 {
            return bad("noise words requested per tweet but the noise vocabulary is empty".into());
        }
        if self.noise_per_tweet.0 > self.noise_per_tweet.1 {
            return bad(format!(
                "noise_per_tweet range {:?} is empty",
                self.noise_per_tweet
            ));
        }
        if !(self.noise_zipf_exponent >= 0.0 && self.noise_zipf_exponent.is_finite()) {
            return bad(format!(
                "noise_zipf_exponent {} must be >= 0",
                self.noise_zipf_exponent
            ));
        }
        if !(0.5..=1.0).contains(&self.signal_strength) {
            return bad(format!(
                "signal_strength {} not in [0.5, 1]",
                self.signal_strength
            ));
        }
        if !(self.volatility > 0.0 && self.volatility < 0.1) {
            return bad(format!("volatility {} not in (0, 0.1)", self.volatility));
        }
        if !(self.up_probability > 0.0 && self.up_probability < 1.0) {
            return bad(format!(
                "up_probability {} not in (0, 1)",
                self.up_probability
            ));
        }
        if self.start_price < Usd::from_dollars(1) {
            return bad("start_price must be at least 1.00".into());
        }
        if trading_days(self.start, self.end).is_empty() {
            return bad(format!(
                "no weekdays between {} and {}",
                self.start, self.end
            ));
        }
        Ok(())
    }

    /// Mean tweets per tweeting hour.
    pub fn tweets_per_hour(&self) -> f64 {
        let slots = trading_days(self.start, self.end).len() * TWEET_HOURS.count();
        self.n_tweets as f64 / slots.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub buy_words: Vec<String>,
    pub sell_words: Vec<String>,
    pub noise_words: Vec<String>,
}

impl GroundTruth {
    pub fn planted(&self) -> Vec<String> {
        self.buy_words
            .iter()
            .chain(&self.sell_words)
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub spec: SynthSpec,
    pub tweets: Vec<Tweet>,
    pub bars: Vec<MinuteBar>,
    pub truth: GroundTruth,
    /// Tweets whose planted word matched the move it precedes.
    pub matched: usize,
}

impl SynthCorpus {
    /// Share of tweets whose planted word agrees with the following move.
    pub fn empirical_strength(&self) -> f64 {
        self.matched as f64 / self.tweets.len() as f64
    }

    /// Writes `tweets.jsonl`, `bars.csv`, `buy_words.txt`, `sell_words.txt`
    /// and `noise_words.txt` into `dir`.
    pub fn write_to(&self, dir: &Path, header: Option<&str>) -> Result<()> {
        fs::create_dir_all(dir)?;
        let open = |name: &str| -> Result<BufWriter<File>> {
            let mut w = BufWriter::new(File::create(dir.join(name))?);
            if let Some(h) = header {
                writeln!(w, "{h}")?;
            }
            Ok(w)
        };
        let mut w = open("tweets.jsonl")?;
        write_tweets(&mut w, &self.tweets)?;
        w.flush()?;
        let mut w = open("bars.csv")?;
        serialize_bars(&mut w, &self.bars)?;
        w.flush()?;
        for (name, words) in [
            ("buy_words.txt", &self.truth.buy_words),
            ("sell_words.txt", &self.truth.sell_words),
            ("noise_words.txt", &self.truth.noise_words),
        ] {
            let mut w = open(name)?;
            for word in words {
                writeln!(w, "{word}")?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

pub fn trading_days(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    start
        .iter_days()
        .take_while(|d| *d <= end)
        .filter(|d| !is_weekend(*d))
        .collect()
}

const CONSONANTS: &[u8] = b"bcdfghjklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// `n` distinct pronounceable lowercase words not in `taken`.
fn make_words(rng: &mut SplitMix64, n: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = 2 + rng.below(3) as usize;
        let mut w = String::with_capacity(syllables * 2);
        for _ in 0..syllables {
            w.push(CONSONANTS[rng.below(CONSONANTS.len() as u64) as usize] as char);
            w.push(VOWELS[rng.below(VOWELS.len() as u64) as usize] as char);
        }
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Rank-frequency law over `n` items: item `r` has weight `1 / (r + 1)^s`.
struct Zipf {
    cumulative: Vec<f64>,
}

impl Zipf {
    fn new(n: usize, exponent: f64) -> Self {
        let mut acc = 0.0;
        let cumulative = (0..n)
            .map(|r| {
                acc += 1.0 / ((r + 1) as f64).powf(exponent);
                acc
            })
            .collect();
        Zipf { cumulative }
    }

    fn sample(&self, rng: &mut SplitMix64) -> usize {
        let total = self.cumulative.last().copied().unwrap_or(0.0);
        let u = rng.next_f64() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

/// Hourly direction of each jump segment, per day.
type DayMoves = Vec<SignalClass>;

fn cents(u: Usd) -> i64 {
    u.units() / 100
}

/// Minute bars for the given days and per-day directions of segments
/// `10..=15`. Prices are whole cents.
fn price_path(
    rng: &mut SplitMix64,
    days: &[NaiveDate],
    moves: &[DayMoves],
    spec: &SynthSpec,
) -> Vec<MinuteBar> {
    let mut bars = Vec::with_capacity(days.len() * 391);
    let mut level = cents(spec.start_price);
    let mut last_close = level;
    for (day, dirs) in days.iter().zip(moves) {
        let noise = ((NOISE_FRACTION * spec.volatility * level as f64).floor() as i64).max(0);
        let floor = 2 * noise + 100;
        let mut t = day.and_time(SESSION_OPEN);
        let close_time = day.and_hms_opt(16, 0, 0).expect("time");
        while t <= close_time {
            let (h, m) = (t.hour(), t.minute());
            if m == 1 && JUMP_HOURS.contains(&h) {
                let dir = dirs[(h - *JUMP_HOURS.start()) as usize];
                let size = ((0.5 + rng.next_f64()) * spec.volatility * level as f64).round() as i64;
                let size = size.max(2 * noise + 1);
                level = match dir {
                    SignalClass::Buy => level + size,
                    SignalClass::Sell if level - size >= floor => level - size,
                    // Too close to zero for a down move of this size: shrink
                    // the move but keep it larger than the noise.
                    SignalClass::Sell => level - (2 * noise + 1),
                };
            }
            let wiggle = if noise > 0 {
                rng.below(2 * noise as u64 + 1) as i64 - noise
            } else {
                0
            };
            let close = level + wiggle;
            let open = last_close;
            let spread = rng.below(3) as i64;
            let high = open.max(close) + spread;
            let low = (open.min(close) - spread).max(1);
            bars.push(MinuteBar {
                timestamp: t,
                open: Usd::from_cents(open),
                high: Usd::from_cents(high),
                low: Usd::from_cents(low),
                close: Usd::from_cents(close),
                volume: 1_000 + rng.below(9_000),
            });
            last_close = close;
            t += Duration::minutes(1);
        }
    }
    bars
}

pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);

    let mut taken = BTreeSet::new();
    let buy_words = make_words(&mut rng, spec.n_buy_words, &mut taken);
    let sell_words = make_words(&mut rng, spec.n_sell_words, &mut taken);
    let noise_words = make_words(&mut rng, spec.n_noise_words, &mut taken);

    let days = trading_days(spec.start, spec.end);
    let moves: Vec<DayMoves> = days
        .iter()
        .map(|_| {
            JUMP_HOURS
                .map(|_| {
                    if rng.chance(spec.up_probability) {
                        SignalClass::Buy
                    } else {
                        SignalClass::Sell
                    }
                })
                .collect()
        })
        .collect();
    let bars = price_path(&mut rng, &days, &moves, spec);

    let noise_law = Zipf::new(noise_words.len(), spec.noise_zipf_exponent);
    let hours: Vec<u32> = TWEET_HOURS.collect();
    let slots = days.len() * hours.len();
    let mut drafts: Vec<(NaiveDateTime, String)> = Vec::with_capacity(spec.n_tweets);
    let mut matched = 0;
    let ticker = spec.ticker.to_ascii_uppercase();
    for _ in 0..spec.n_tweets {
        let slot = rng.below(slots as u64) as usize;
        let (d, h) = (slot / hours.len(), hours[slot % hours.len()]);
        let minute = 1 + rng.below(59) as u32;
        let second = rng.below(60) as u32;
        let local = days[d].and_hms_opt(h, minute, second).expect("time");
        let next_move = moves[d][(h + 1 - *JUMP_HOURS.start()) as usize];

        let agrees = rng.chance(spec.signal_strength);
        if agrees {
            matched += 1;
        }
        let flipped = spec.flip_date.is_some_and(|f| days[d] < f);
        let word_dir = if agrees {
            next_move
        } else {
            opposite(next_move)
        };
        let list = match (word_dir, flipped) {
            (SignalClass::Buy, false) | (SignalClass::Sell, true) => &buy_words,
            (SignalClass::Sell, false) | (SignalClass::Buy, true) => &sell_words,
        };
        let planted = &list[rng.below(list.len() as u64) as usize];

        let (lo, hi) = spec.noise_per_tweet;
        let k = lo + rng.below((hi - lo + 1) as u64) as usize;
        let mut words: Vec<&str> = Vec::with_capacity(k + 2);
        for _ in 0..k {
            words.push(&noise_words[noise_law.sample(&mut rng)]);
        }
        let pos = rng.below(words.len() as u64 + 1) as usize;
        words.insert(pos, planted);
        let text = format!("${ticker} {}", words.join(" "));
        drafts.push((local, text));
    }
    // Stable sort keeps generation order among equal timestamps.
    drafts.sort_by_key(|d| d.0);
    let tweets = drafts
        .into_iter()
        .enumerate()
        .map(|(i, (local, text))| Tweet::new(format!("syn-{i:06}"), eastern_to_utc(&local), text))
        .collect();

    Ok(SynthCorpus {
        spec: spec.clone(),
        tweets,
        bars,
        truth: GroundTruth {
            buy_words,
            sell_words,
            noise_words,
        },
        matched,
    })
}

fn opposite(c: SignalClass) -> SignalClass {
    match c {
        SignalClass::Buy => SignalClass::Sell,
        SignalClass::Sell => SignalClass::Buy,
    }
}

/// Bars of an independent random walk with no tweets, for use as a
/// buy-and-hold benchmark.
pub fn benchmark_bars(
    seed: u64,
    start: NaiveDate,
    end: NaiveDate,
    volatility: f64,
) -> Result<Vec<MinuteBar>> {
    let spec = SynthSpec {
        seed,
        start,
        end,
        volatility,
        ..SynthSpec::default()
    };
    spec.validate()?;
    let mut rng = SplitMix64::new(seed ^ 0x5EED_BE7C_4A11_0000);
    let days = trading_days(start, end);
    let moves: Vec<DayMoves> = days
        .iter()
        .map(|_| {
            JUMP_HOURS
                .map(|_| {
                    if rng.chance(0.5) {
                        SignalClass::Buy
                    } else {
                        SignalClass::Sell
                    }
                })
                .collect()
        })
        .collect();
    Ok(price_path(&mut rng, &days, &moves, &spec))
}

/// Share of the planted words found among the first `k` ranked terms,
/// relative to the most that could fit.
pub fn recovery_score<S: AsRef<str>>(ranked_terms: &[S], planted: &[String], k: usize) -> f64 {
    let denom = k.min(planted.len());
    if denom == 0 {
        return 0.0;
    }
    let truth: BTreeSet<&str> = planted.iter().map(String::as_str).collect();
    let hits = ranked_terms
        .iter()
        .take(k)
        .filter(|t| truth.contains(t.as_ref()))
        .count();
    hits as f64 / denom as f64
}

/// Calendar month containing `date`, as its first day.
pub fn month_start(date: NaiveDate) -> NaiveDate {
    NaiveDate::from_ymd_opt(date.year(), date.month(), 1).expect("first of month")
}
