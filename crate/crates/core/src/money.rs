//! Fixed-point USD amounts.
//!
//! Amounts are stored as signed integers in units of 1/10_000 dollar so that
//! bar prices with up to four decimal places and 100-share position P&L are
//! exact. All accounting sums go through this type; conversion to `f64`
//! happens only when a ratio is reported.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Sub-units per dollar.
pub const SCALE: i64 = 10_000;
const DECIMALS: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Usd(i64);

impl Usd {
    pub const ZERO: Usd = Usd(0);

    pub const fn from_units(units: i64) -> Self {
        Usd(units)
    }

    pub const fn from_cents(cents: i64) -> Self {
        Usd(cents * (SCALE / 100))
    }

    pub const fn from_dollars(dollars: i64) -> Self {
        Usd(dollars * SCALE)
    }

    pub const fn units(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    /// Nearest representable amount; used only when reading floats back from JSON.
    pub fn from_f64_rounded(value: f64) -> Self {
        Usd((value * SCALE as f64).round() as i64)
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn abs(self) -> Self {
        Usd(self.0.abs())
    }

    /// Ratio of two amounts as a float.
    pub fn ratio(self, denominator: Usd) -> f64 {
        self.0 as f64 / denominator.0 as f64
    }

    /// Scale by an exact decimal fraction `numer / denom`, rounding half away from zero.
    pub fn mul_ratio(self, numer: i64, denom: i64) -> Self {
        let p = self.0 as i128 * numer as i128;
        let d = denom as i128;
        let q = p / d;
        let r = p % d;
        let adj = if 2 * r.abs() >= d.abs() {
            if (p < 0) != (d < 0) {
                -1
            } else {
                1
            }
        } else {
            0
        };
        Usd((q + adj) as i64)
    }
}

impl fmt::Display for Usd {
    /// Renders at least two decimal places, more only when needed.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / SCALE as u64;
        let frac = abs % SCALE as u64;
        let mut digits = format!("{frac:04}");
        while digits.len() > 2 && digits.ends_with('0') {
            digits.pop();
        }
        write!(f, "{sign}{whole}.{digits}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseUsdError(pub String);

impl fmt::Display for ParseUsdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid decimal amount `{}`", self.0)
    }
}

impl std::error::Error for ParseUsdError {}

impl FromStr for Usd {
    type Err = ParseUsdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseUsdError(s.to_string());
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        // Extra digits are accepted only when they are trailing zeros.
        let significant = frac_part.trim_end_matches('0');
        if significant.len() > DECIMALS {
            return Err(err());
        }
        let whole: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| err())?
        };
        let mut frac: i64 = 0;
        for (i, b) in significant.bytes().enumerate() {
            frac += (b - b'0') as i64 * 10_i64.pow((DECIMALS - 1 - i) as u32);
        }
        let units = whole
            .checked_mul(SCALE)
            .and_then(|w| w.checked_add(frac))
            .ok_or_else(err)?;
        Ok(Usd(if neg { -units } else { units }))
    }
}

impl Add for Usd {
    type Output = Usd;
    fn add(self, rhs: Usd) -> Usd {
        Usd(self.0 + rhs.0)
    }
}

impl AddAssign for Usd {
    fn add_assign(&mut self, rhs: Usd) {
        self.0 += rhs.0;
    }
}

impl Sub for Usd {
    type Output = Usd;
    fn sub(self, rhs: Usd) -> Usd {
        Usd(self.0 - rhs.0)
    }
}

impl Neg for Usd {
    type Output = Usd;
    fn neg(self) -> Usd {
        Usd(-self.0)
    }
}

impl Mul<i64> for Usd {
    type Output = Usd;
    fn mul(self, rhs: i64) -> Usd {
        Usd(self.0 * rhs)
    }
}

impl Sum for Usd {
    fn sum<I: Iterator<Item = Usd>>(iter: I) -> Usd {
        iter.fold(Usd::ZERO, Add::add)
    }
}

impl Serialize for Usd {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Usd {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        Ok(Usd::from_f64_rounded(v))
    }
}
