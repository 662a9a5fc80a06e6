use std::io::{Read, Write};

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use super::calendar::{is_weekend, SESSION_CLOSE, SESSION_OPEN};
use crate::error::{Error, Result};
use crate::money::Usd;

/// One minute of OHLCV data, stamped with the exchange-local minute it opens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinuteBar {
    pub timestamp: NaiveDateTime,
    pub open: Usd,
    pub high: Usd,
    pub low: Usd,
    pub close: Usd,
    pub volume: u64,
}

impl MinuteBar {
    pub fn check(&self) -> std::result::Result<(), String> {
        if !self.low.is_positive() {
            return Err(format!("non-positive price {}", self.low));
        }
        if self.low > self.high {
            return Err(format!("low {} > high {}", self.low, self.high));
        }
        for (name, v) in [("open", self.open), ("close", self.close)] {
            if v < self.low || v > self.high {
                return Err(format!("{name} {v} outside [{}, {}]", self.low, self.high));
            }
        }
        let t = self.timestamp.time();
        if t < SESSION_OPEN || t > SESSION_CLOSE || t.second() != 0 {
            return Err(format!(
                "time {} outside 09:30-16:00 minute grid",
                t.format("%H:%M:%S")
            ));
        }
        if is_weekend(self.timestamp.date()) {
            return Err(format!("weekend date {}", self.timestamp.date()));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct BarRow {
    date: String,
    time: String,
    open: String,
    high: String,
    low: String,
    close: String,
    volume: String,
}

const HEADER: [&str; 7] = ["date", "time", "open", "high", "low", "close", "volume"];

fn parse_row(row: &BarRow) -> std::result::Result<MinuteBar, String> {
    let date = NaiveDate::parse_from_str(row.date.trim(), "%Y-%m-%d")
        .map_err(|e| format!("bad date `{}`: {e}", row.date))?;
    let time = NaiveTime::parse_from_str(row.time.trim(), "%H:%M")
        .map_err(|e| format!("bad time `{}`: {e}", row.time))?;
    let price = |s: &str| s.parse::<Usd>().map_err(|e| e.to_string());
    let volume = row
        .volume
        .trim()
        .parse::<u64>()
        .map_err(|e| format!("bad volume `{}`: {e}", row.volume))?;
    Ok(MinuteBar {
        timestamp: date.and_time(time),
        open: price(&row.open)?,
        high: price(&row.high)?,
        low: price(&row.low)?,
        close: price(&row.close)?,
        volume,
    })
}

/// Reads the `date,time,open,high,low,close,volume` CSV format.
///
/// Rows must be strictly increasing in time; duplicates, reordering and OHLC
/// violations are reported with the file line number. Lines starting with `#`
/// are ignored.
pub fn parse_bars<R: Read>(source: R) -> Result<Vec<MinuteBar>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::row(
            1,
            format!("expected header `{}`", HEADER.join(",")),
        ));
    }
    let mut bars: Vec<MinuteBar> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record
            .position()
            .map_or(bars.len() + 2, |p| p.line() as usize);
        let row: BarRow = record
            .deserialize(Some(&headers))
            .map_err(|e| Error::row(line, e.to_string()))?;
        let bar = parse_row(&row).map_err(|m| Error::row(line, m))?;
        bar.check().map_err(|m| Error::row(line, m))?;
        if let Some(prev) = bars.last() {
            if bar.timestamp == prev.timestamp {
                return Err(Error::row(
                    line,
                    format!("duplicate timestamp {}", bar.timestamp),
                ));
            }
            if bar.timestamp < prev.timestamp {
                return Err(Error::row(
                    line,
                    format!("timestamp {} precedes {}", bar.timestamp, prev.timestamp),
                ));
            }
        }
        bars.push(bar);
    }
    Ok(bars)
}

pub fn serialize_bars<W: Write>(sink: W, bars: &[MinuteBar]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(HEADER)?;
    for b in bars {
        writer.write_record([
            b.timestamp.format("%Y-%m-%d").to_string(),
            b.timestamp.format("%H:%M").to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
