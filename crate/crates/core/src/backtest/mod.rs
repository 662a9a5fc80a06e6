//! Hourly trading simulation. At each decision hour the documents of the
//! preceding hour vote; the Buy share against a threshold picks the
//! direction of a fixed-size position held for one hour.

mod chart;

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Tweet;
use crate::labeler::{DateRange, PriceSeries, SignalClass, StockContext, HORIZON_MINUTES};
use crate::lexicon::Lexicon;
use crate::money::Usd;
use crate::pipeline::TrainedModel;
use crate::tokenizer::tokenize;

pub use chart::{equity_svg, write_equity_csv};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    /// Buy when the Buy share of the window is at least this.
    pub threshold: f64,
    pub shares: i64,
    /// Decision hours, exchange time, on the hour.
    pub decision_hours: Vec<u32>,
    pub margin: f64,
    pub monthly_fee_rate: f64,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            threshold: 0.5,
            shares: 100,
            decision_hours: (10..=15).collect(),
            margin: 0.10,
            monthly_fee_rate: 0.0096,
        }
    }
}

/// A document's vote at its exchange-local time; `None` abstains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SignalDoc {
    pub timestamp: NaiveDateTime,
    pub class: Option<SignalClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trade {
    pub ticker: String,
    pub decision_time: NaiveDateTime,
    pub direction: SignalClass,
    pub shares: i64,
    pub entry: Usd,
    pub exit: Usd,
    pub pnl: Usd,
    pub tweet_count: usize,
    pub buy_fraction: f64,
    /// Timestamp of the newest document that voted.
    pub latest_doc: NaiveDateTime,
}

impl Trade {
    pub fn exit_time(&self) -> NaiveDateTime {
        self.decision_time + Duration::minutes(HORIZON_MINUTES)
    }

    pub fn is_correct(&self) -> bool {
        self.pnl.is_positive()
    }
}

/// Signed price difference times shares.
pub fn trade_pnl(direction: SignalClass, entry: Usd, exit: Usd, shares: i64) -> Usd {
    match direction {
        SignalClass::Buy => (exit - entry) * shares,
        SignalClass::Sell => (entry - exit) * shares,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedDecision {
    pub decision_time: NaiveDateTime,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Account {
    pub ticker: String,
    pub max_price: Usd,
    pub size: Usd,
    pub monthly_fee_rate: f64,
}

/// `(1 + margin) * max_price * shares`, rounded to the nearest 1/10000 dollar.
pub fn account_size(max_price: Usd, shares: i64, margin: f64) -> Result<Usd> {
    if !margin.is_finite() || margin < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "margin {margin} must be >= 0"
        )));
    }
    const DENOM: i64 = 1_000_000;
    let numer = ((1.0 + margin) * DENOM as f64).round() as i64;
    Ok((max_price * shares).mul_ratio(numer, DENOM))
}

/// Sizes the account from the highest bar high in `period`.
pub fn size_account(
    ticker: &str,
    series: &PriceSeries,
    period: DateRange,
    config: &BacktestConfig,
) -> Result<Account> {
    let max_price = series.max_high(period.start, period.end).ok_or_else(|| {
        Error::MissingData(format!(
            "no {ticker} bars between {} and {}",
            period.start, period.end
        ))
    })?;
    let size = account_size(max_price, config.shares, config.margin)?;
    if !size.is_positive() {
        return Err(Error::InvalidArgument(
            "account size must be positive".into(),
        ));
    }
    Ok(Account {
        ticker: ticker.to_string(),
        max_price,
        size,
        monthly_fee_rate: config.monthly_fee_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Returns {
    pub return_rate: f64,
    pub net_return_rate: f64,
    pub annualized: f64,
}

/// Gross monthly rate, the rate after the flat monthly fee, and the
/// gross rate compounded over twelve months.
pub fn compute_returns(
    gross_pnl: Usd,
    account_size: Usd,
    monthly_fee_rate: f64,
) -> Result<Returns> {
    if !account_size.is_positive() {
        return Err(Error::InvalidArgument(
            "account size must be positive".into(),
        ));
    }
    let r = gross_pnl.ratio(account_size);
    Ok(Returns {
        return_rate: r,
        net_return_rate: r - monthly_fee_rate,
        annualized: (1.0 + r).powi(12) - 1.0,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DirectionStats {
    pub placed: usize,
    /// Share of all trades, in percent.
    pub placed_pct: f64,
    pub correct: usize,
    /// Share of this direction's trades with positive pnl, in percent.
    pub correct_pct: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub buy: DirectionStats,
    pub sell: DirectionStats,
    pub placed: usize,
    pub correct: usize,
    pub correct_pct: Option<f64>,
}

fn pct(part: usize, whole: usize) -> Option<f64> {
    (whole > 0).then(|| 100.0 * part as f64 / whole as f64)
}

pub fn breakdown(trades: &[Trade]) -> Breakdown {
    let stats = |dir: SignalClass| {
        let placed = trades.iter().filter(|t| t.direction == dir).count();
        let correct = trades
            .iter()
            .filter(|t| t.direction == dir && t.is_correct())
            .count();
        DirectionStats {
            placed,
            placed_pct: pct(placed, trades.len()).unwrap_or(0.0),
            correct,
            correct_pct: pct(correct, placed),
        }
    };
    let (buy, sell) = (stats(SignalClass::Buy), stats(SignalClass::Sell));
    Breakdown {
        buy,
        sell,
        placed: trades.len(),
        correct: buy.correct + sell.correct,
        correct_pct: pct(buy.correct + sell.correct, trades.len()),
    }
}

/// Share of trades at or above which one direction is flagged as dominant.
pub const ONE_SIDED_SHARE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub ticker: String,
    pub method: String,
    pub period: DateRange,
    pub config: BacktestConfig,
    pub account: Account,
    pub trades: Vec<Trade>,
    pub skipped: Vec<SkippedDecision>,
    pub gross_pnl: Usd,
    pub return_rate: f64,
    pub net_return_rate: f64,
    pub annualized: f64,
    pub breakdown: Breakdown,
    pub equity_curve: Vec<Usd>,
    /// Buy trades over all trades; `None` without trades.
    pub buy_share: Option<f64>,
    /// Set when nearly every trade went the same way.
    pub one_sided: bool,
    /// Day's pnl over account size for each trading day in the period.
    pub daily_returns: Vec<(NaiveDate, f64)>,
}

fn decision_instants(series: &PriceSeries, period: DateRange, hours: &[u32]) -> Vec<NaiveDateTime> {
    let mut out = Vec::new();
    for day in series.calendar().days().filter(|d| period.contains(*d)) {
        for &h in hours {
            if let Some(time) = NaiveTime::from_hms_opt(h, 0, 0) {
                out.push(day.and_time(time));
            }
        }
    }
    out
}

/// Runs the hourly strategy for one ticker over `period`.
pub fn run_backtest(
    ticker: &str,
    method: &str,
    docs: &[SignalDoc],
    series: &PriceSeries,
    period: DateRange,
    config: &BacktestConfig,
) -> Result<BacktestReport> {
    if !(0.0..=1.0).contains(&config.threshold) {
        return Err(Error::InvalidArgument(format!(
            "threshold {} not in [0, 1]",
            config.threshold
        )));
    }
    let account = size_account(ticker, series, period, config)?;
    let mut votes: Vec<(NaiveDateTime, SignalClass)> = docs
        .iter()
        .filter_map(|d| d.class.map(|c| (d.timestamp, c)))
        .collect();
    votes.sort();

    let horizon = Duration::minutes(HORIZON_MINUTES);
    let mut trades = Vec::new();
    let mut skipped = Vec::new();
    for t in decision_instants(series, period, &config.decision_hours) {
        let lo = votes.partition_point(|(ts, _)| *ts < t - horizon);
        let hi = votes.partition_point(|(ts, _)| *ts < t);
        let window = &votes[lo..hi];
        if window.is_empty() {
            skipped.push(SkippedDecision {
                decision_time: t,
                reason: "no-signal".into(),
            });
            continue;
        }
        let buys = window.iter().filter(|(_, c)| c.is_buy()).count();
        let buy_fraction = buys as f64 / window.len() as f64;
        let direction = if buy_fraction >= config.threshold {
            SignalClass::Buy
        } else {
            SignalClass::Sell
        };
        let (entry, exit) = match (series.price_at(&t), series.price_at(&(t + horizon))) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                skipped.push(SkippedDecision {
                    decision_time: t,
                    reason: "missing-price".into(),
                });
                continue;
            }
        };
        trades.push(Trade {
            ticker: ticker.to_string(),
            decision_time: t,
            direction,
            shares: config.shares,
            entry,
            exit,
            pnl: trade_pnl(direction, entry, exit, config.shares),
            tweet_count: window.len(),
            buy_fraction,
            latest_doc: window[window.len() - 1].0,
        });
    }

    let gross_pnl: Usd = trades.iter().map(|t| t.pnl).sum();
    let returns = compute_returns(gross_pnl, account.size, config.monthly_fee_rate)?;
    let equity_curve = trades
        .iter()
        .scan(Usd::ZERO, |acc, t| {
            *acc += t.pnl;
            Some(*acc)
        })
        .collect();
    let buy_share = (!trades.is_empty()).then(|| {
        trades.iter().filter(|t| t.direction.is_buy()).count() as f64 / trades.len() as f64
    });
    let mut by_day: BTreeMap<NaiveDate, Usd> = series
        .calendar()
        .days()
        .filter(|d| period.contains(*d))
        .map(|d| (d, Usd::ZERO))
        .collect();
    for t in &trades {
        *by_day.entry(t.decision_time.date()).or_default() += t.pnl;
    }
    Ok(BacktestReport {
        ticker: ticker.to_string(),
        method: method.to_string(),
        period,
        config: config.clone(),
        gross_pnl,
        return_rate: returns.return_rate,
        net_return_rate: returns.net_return_rate,
        annualized: returns.annualized,
        breakdown: breakdown(&trades),
        equity_curve,
        buy_share,
        one_sided: buy_share.is_some_and(|s| s >= ONE_SIDED_SHARE || s <= 1.0 - ONE_SIDED_SHARE),
        daily_returns: by_day
            .into_iter()
            .map(|(d, p)| (d, p.ratio(account.size)))
            .collect(),
        account,
        trades,
        skipped,
    })
}

/// Every voting document predates its trade's decision time.
pub fn look_ahead_free(report: &BacktestReport) -> bool {
    report.trades.iter().all(|t| t.latest_doc < t.decision_time)
}

/// `ticker,decision_time,direction,shares,entry,exit,pnl,tweet_count,buy_fraction`
pub fn write_trade_log<W: Write>(mut sink: W, trades: &[Trade]) -> Result<()> {
    writeln!(
        sink,
        "ticker,decision_time,direction,shares,entry,exit,pnl,tweet_count,buy_fraction"
    )?;
    for t in trades {
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{},{:.6}",
            t.ticker,
            t.decision_time.format("%Y-%m-%dT%H:%M:%S"),
            t.direction,
            t.shares,
            t.entry,
            t.exit,
            t.pnl,
            t.tweet_count,
            t.buy_fraction
        )?;
    }
    Ok(())
}

/// Combined view over several single-ticker reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub tickers: Vec<String>,
    pub trades: usize,
    pub correct: usize,
    pub gross_pnl: Usd,
    pub total_account: Usd,
    /// Mean of the per-ticker gross rates.
    pub equal_weight_return: f64,
    /// Total pnl over total account size.
    pub account_weighted_return: f64,
    pub equal_weight_net_return: f64,
}

pub fn aggregate(reports: &[BacktestReport]) -> Result<Aggregate> {
    if reports.is_empty() {
        return Err(Error::Empty("backtest reports"));
    }
    let gross_pnl: Usd = reports.iter().map(|r| r.gross_pnl).sum();
    let total_account: Usd = reports.iter().map(|r| r.account.size).sum();
    let n = reports.len() as f64;
    Ok(Aggregate {
        tickers: reports.iter().map(|r| r.ticker.clone()).collect(),
        trades: reports.iter().map(|r| r.trades.len()).sum(),
        correct: reports.iter().map(|r| r.breakdown.correct).sum(),
        gross_pnl,
        total_account,
        equal_weight_return: reports.iter().map(|r| r.return_rate).sum::<f64>() / n,
        account_weighted_return: gross_pnl.ratio(total_account),
        equal_weight_net_return: reports.iter().map(|r| r.net_return_rate).sum::<f64>() / n,
    })
}

/// Lexicon votes for each tweet.
pub fn signals_from_lexicon(tweets: &[&Tweet], lexicon: &Lexicon) -> Vec<SignalDoc> {
    tweets
        .iter()
        .map(|t| SignalDoc {
            timestamp: t.local_time(),
            class: lexicon.classify(&tokenize(&t.text)),
        })
        .collect()
}

/// Model votes for each tweet. Context features that cannot be computed at
/// the tweet's time (before the session has an hour of bars) fall back to
/// zero, keeping only the weekday.
pub fn signals_from_model(
    tweets: &[&Tweet],
    model: &TrainedModel,
    series: &PriceSeries,
) -> Result<Vec<SignalDoc>> {
    let stamps: Vec<NaiveDateTime> = tweets.iter().map(|t| t.local_time()).collect();
    let tokens: Vec<Vec<String>> = tweets.iter().map(|t| tokenize(&t.text)).collect();
    let contexts: Vec<StockContext> = stamps
        .iter()
        .map(|ts| {
            StockContext::at(series, ts, model.mean_hour_volume).unwrap_or(StockContext {
                weekday: ts.weekday().num_days_from_monday() as u8,
                ..StockContext::default()
            })
        })
        .collect();
    let predictions = model.predict_tokens(&tokens, &contexts)?;
    Ok(stamps
        .into_iter()
        .zip(predictions)
        .map(|(timestamp, p)| SignalDoc {
            timestamp,
            class: Some(p.class),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::MinuteBar;
    use SignalClass::{Buy, Sell};

    fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2017, 1, 3).unwrap()
    }

    fn at(h: u32, m: u32) -> NaiveDateTime {
        day().and_hms_opt(h, m, 0).unwrap()
    }

    /// One session where the close rises one cent per minute.
    fn rising() -> PriceSeries {
        let mut bars = Vec::new();
        let mut t = at(9, 30);
        let mut cents = 10_000;
        while t <= at(16, 0) {
            let p = Usd::from_cents(cents);
            bars.push(MinuteBar {
                timestamp: t,
                open: p,
                high: p,
                low: p,
                close: p,
                volume: 10,
            });
            t += Duration::minutes(1);
            cents += 1;
        }
        PriceSeries::new(bars)
    }

    fn period() -> DateRange {
        DateRange::new(day(), day())
    }

    fn vote(h: u32, m: u32, c: Option<SignalClass>) -> SignalDoc {
        SignalDoc {
            timestamp: at(h, m),
            class: c,
        }
    }

    #[test]
    fn account_and_returns() {
        assert_eq!(
            account_size(Usd::from_dollars(122), 100, 0.10).unwrap(),
            Usd::from_dollars(13_420)
        );
        assert_eq!(
            account_size(Usd::from_dollars(100), 100, 0.10).unwrap(),
            Usd::from_dollars(11_000)
        );
        assert_eq!(
            account_size(Usd::from_cents(12_345), 100, 0.0).unwrap(),
            Usd::from_cents(1_234_500)
        );
        let r =
            compute_returns("729.50".parse().unwrap(), Usd::from_dollars(13_420), 0.0096).unwrap();
        assert!((r.return_rate - 0.054_359_165).abs() < 1e-9);
        assert!((r.net_return_rate - (r.return_rate - 0.0096)).abs() < 1e-15);
        assert!(compute_returns(Usd::ZERO, Usd::ZERO, 0.0).is_err());
    }

    #[test]
    fn every_hour_trades_with_votes() {
        let docs: Vec<SignalDoc> = (9..15).map(|h| vote(h, 40, Some(Buy))).collect();
        let r = run_backtest(
            "AAPL",
            "a",
            &docs,
            &rising(),
            period(),
            &BacktestConfig::default(),
        )
        .unwrap();
        assert_eq!(r.trades.len(), 6);
        // 60 minutes at one cent, 100 shares.
        assert!(r.trades.iter().all(|t| t.pnl == Usd::from_dollars(60)));
        assert_eq!(r.gross_pnl, Usd::from_dollars(360));
        assert_eq!(r.breakdown.buy.correct, 6);
        assert!(r.one_sided);
        assert!(look_ahead_free(&r));
        assert_eq!(r.trades[5].exit_time(), at(16, 0));
    }

    #[test]
    fn threshold_empty_windows_and_abstentions() {
        let docs = vec![
            vote(9, 10, Some(Buy)),
            vote(9, 20, Some(Buy)),
            vote(9, 30, Some(Buy)),
            vote(9, 40, Some(Sell)),
            vote(10, 5, Some(Sell)),
            vote(10, 6, None),
            vote(11, 0, Some(Buy)), // belongs to the 12:00 window
            vote(12, 0, None),
        ];
        let r = run_backtest(
            "AAPL",
            "b",
            &docs,
            &rising(),
            period(),
            &BacktestConfig::default(),
        )
        .unwrap();
        assert_eq!(r.trades.len(), 3);
        assert_eq!(
            (r.trades[0].direction, r.trades[0].buy_fraction),
            (Buy, 0.75)
        );
        assert_eq!((r.trades[1].direction, r.trades[1].tweet_count), (Sell, 1));
        assert_eq!(r.trades[2].decision_time, at(12, 0));
        assert_eq!(r.skipped.len(), 3);
        assert_eq!(r.trades[1].pnl, Usd::from_dollars(-60));
    }

    #[test]
    fn tie_goes_to_buy() {
        let docs = vec![vote(9, 50, Some(Buy)), vote(9, 51, Some(Sell))];
        let r = run_backtest(
            "AAPL",
            "a",
            &docs,
            &rising(),
            period(),
            &BacktestConfig::default(),
        )
        .unwrap();
        assert_eq!(r.trades[0].direction, Buy);
    }

    #[test]
    fn opposite_trades_cancel() {
        let (a, b) = (Usd::from_cents(10_012), Usd::from_cents(9_987));
        assert_eq!(
            trade_pnl(Buy, a, b, 100) + trade_pnl(Sell, a, b, 100),
            Usd::ZERO
        );
    }

    fn trade(dir: SignalClass, pnl_cents: i64) -> Trade {
        Trade {
            ticker: "X".into(),
            decision_time: at(10, 0),
            direction: dir,
            shares: 100,
            entry: Usd::ZERO,
            exit: Usd::ZERO,
            pnl: Usd::from_cents(pnl_cents),
            tweet_count: 1,
            buy_fraction: 1.0,
            latest_doc: at(9, 59),
        }
    }

    #[test]
    fn breakdown_counts() {
        let mut trades = Vec::new();
        trades.extend((0..51).map(|i| trade(Buy, if i < 32 { 1 } else { -1 })));
        trades.extend((0..69).map(|i| trade(Sell, if i < 45 { 1 } else { 0 })));
        let b = breakdown(&trades);
        assert!((b.buy.placed_pct - 42.5).abs() < 1e-9);
        assert!((b.buy.correct_pct.unwrap() - 62.745).abs() < 1e-3);
        assert!((b.sell.correct_pct.unwrap() - 65.217).abs() < 1e-3);
        assert!((b.correct_pct.unwrap() - 64.1667).abs() < 1e-3);
        let losing = breakdown(&[trade(Buy, -1), trade(Sell, 0)]);
        assert_eq!(
            (losing.buy.correct_pct, losing.sell.correct_pct),
            (Some(0.0), Some(0.0))
        );
    }

    #[test]
    fn trade_log_format() {
        let mut out = Vec::new();
        write_trade_log(&mut out, &[trade(Sell, 2550)]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "X,2017-01-03T10:00:00,Sell,100,0.00,0.00,25.50,1,1.000000"
        );
    }
}
