//! US/Eastern clock conversion and the session calendar.
//!
//! The DST table is computed from the US federal rules rather than read
//! from the OS timezone database:
//! - 2007 onward: second Sunday of March to first Sunday of November.
//! - before 2007: first Sunday of April to last Sunday of October.
//!
//! Transitions happen at 02:00 local time.

use std::collections::BTreeSet;

use chrono::{
    DateTime, Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, TimeZone, Utc, Weekday,
};

use super::MinuteBar;

pub const SESSION_OPEN: NaiveTime = match NaiveTime::from_hms_opt(9, 30, 0) {
    Some(t) => t,
    None => unreachable!(),
};
pub const SESSION_CLOSE: NaiveTime = match NaiveTime::from_hms_opt(16, 0, 0) {
    Some(t) => t,
    None => unreachable!(),
};

const EST_OFFSET_HOURS: i64 = -5;
const EDT_OFFSET_HOURS: i64 = -4;

fn nth_weekday(year: i32, month: u32, weekday: Weekday, n: u8) -> NaiveDate {
    NaiveDate::from_weekday_of_month_opt(year, month, weekday, n).expect("valid nth weekday")
}

fn last_sunday(year: i32, month: u32) -> NaiveDate {
    let first_next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    }
    .expect("valid date");
    let mut d = first_next - Duration::days(1);
    while d.weekday() != Weekday::Sun {
        d -= Duration::days(1);
    }
    d
}

/// UTC instants at which daylight time starts and ends in `year`.
pub fn dst_bounds_utc(year: i32) -> (NaiveDateTime, NaiveDateTime) {
    let (start, end) = if year >= 2007 {
        (
            nth_weekday(year, 3, Weekday::Sun, 2),
            nth_weekday(year, 11, Weekday::Sun, 1),
        )
    } else {
        (nth_weekday(year, 4, Weekday::Sun, 1), last_sunday(year, 10))
    };
    let two_am = NaiveTime::from_hms_opt(2, 0, 0).unwrap();
    // 02:00 EST = 07:00 UTC; 02:00 EDT = 06:00 UTC.
    (
        start.and_time(two_am) - Duration::hours(EST_OFFSET_HOURS),
        end.and_time(two_am) - Duration::hours(EDT_OFFSET_HOURS),
    )
}

/// UTC offset in hours for the given UTC instant.
pub fn eastern_offset_hours(utc: &DateTime<Utc>) -> i64 {
    let naive = utc.naive_utc();
    let (start, end) = dst_bounds_utc(naive.year());
    if naive >= start && naive < end {
        EDT_OFFSET_HOURS
    } else {
        EST_OFFSET_HOURS
    }
}

pub fn utc_to_eastern(utc: &DateTime<Utc>) -> NaiveDateTime {
    utc.naive_utc() + Duration::hours(eastern_offset_hours(utc))
}

/// Inverse of [`utc_to_eastern`]. In the repeated autumn hour the daylight
/// reading is taken; in the skipped spring hour the standard reading is taken.
pub fn eastern_to_utc(local: &NaiveDateTime) -> DateTime<Utc> {
    for offset in [EDT_OFFSET_HOURS, EST_OFFSET_HOURS] {
        let candidate = Utc.from_utc_datetime(&(*local - Duration::hours(offset)));
        if eastern_offset_hours(&candidate) == offset {
            return candidate;
        }
    }
    Utc.from_utc_datetime(&(*local - Duration::hours(EST_OFFSET_HOURS)))
}

pub fn is_weekend(date: NaiveDate) -> bool {
    matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

/// Trading days known from a bar file. Holidays are whatever dates are
/// missing from the bars.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TradingCalendar {
    days: BTreeSet<NaiveDate>,
}

impl TradingCalendar {
    pub fn from_bars(bars: &[MinuteBar]) -> Self {
        TradingCalendar {
            days: bars
                .iter()
                .map(|b| b.timestamp.date())
                .filter(|d| !is_weekend(*d))
                .collect(),
        }
    }

    pub fn is_trading_day(&self, date: NaiveDate) -> bool {
        self.days.contains(&date)
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.days.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn open_at(date: NaiveDate) -> NaiveDateTime {
        date.and_time(SESSION_OPEN)
    }

    pub fn close_at(date: NaiveDate) -> NaiveDateTime {
        date.and_time(SESSION_CLOSE)
    }

    pub fn in_session(&self, instant: &NaiveDateTime) -> bool {
        let t = instant.time();
        self.is_trading_day(instant.date()) && t >= SESSION_OPEN && t <= SESSION_CLOSE
    }
}
