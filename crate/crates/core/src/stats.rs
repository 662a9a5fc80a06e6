//! Binomial significance of a hit count and the ex-ante Sharpe ratio.

use chrono::NaiveDate;
use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::labeler::{DateRange, PriceSeries};

fn check_domain(n: u64, k: u64, p: f64) -> Result<()> {
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} not in (0, 1)")));
    }
    Ok(())
}

fn ln_pmf(n: u64, k: u64, p: f64) -> f64 {
    ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()
}

/// P(X = k) for X ~ Binomial(n, p), evaluated in log space.
pub fn binom_pmf(n: u64, k: u64, p: f64) -> Result<f64> {
    check_domain(n, k, p)?;
    Ok(ln_pmf(n, k, p).exp())
}

/// P(X >= k_min). `k_min > n` gives 0.
pub fn binom_survival(n: u64, k_min: u64, p: f64) -> Result<f64> {
    check_domain(n, k_min.min(n), p)?;
    if k_min > n {
        return Ok(0.0);
    }
    let terms: Vec<f64> = (k_min..=n).map(|j| ln_pmf(n, j, p)).collect();
    let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - peak).exp()).sum();
    Ok((peak + sum.ln()).exp().min(1.0))
}

fn check_frames(prob: f64, frames: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::InvalidArgument(format!(
            "probability {prob} not in [0, 1]"
        )));
    }
    if !frames.is_finite() || frames < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "frames = {frames} must be >= 1"
        )));
    }
    Ok(())
}

/// Discounts selection of a favourable window among `frames` candidates by
/// multiplying, capped at 1.
pub fn frame_adjust(prob: f64, frames: f64) -> Result<f64> {
    check_frames(prob, frames)?;
    Ok((prob * frames).min(1.0))
}

/// Chance that at least one of `frames` independent windows hits `prob`.
pub fn frame_adjust_independent(prob: f64, frames: f64) -> Result<f64> {
    check_frames(prob, frames)?;
    Ok(1.0 - (1.0 - prob).powf(frames))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndependentVariant {
    pub pmf: f64,
    pub survival: f64,
    pub survival_strict: f64,
}

/// `survival` is P(X >= k); `survival_strict` is P(X >= k + 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignificanceReport {
    pub n: u64,
    pub k: u64,
    pub p: f64,
    pub frames: f64,
    pub pmf: f64,
    pub survival: f64,
    pub survival_strict: f64,
    pub frame_adjusted_pmf: f64,
    pub frame_adjusted_survival: f64,
    pub frame_adjusted_survival_strict: f64,
    pub independent_periods_variant: IndependentVariant,
}

pub fn significance(n: u64, k: u64, p: f64, frames: f64) -> Result<SignificanceReport> {
    let pmf = binom_pmf(n, k, p)?;
    let survival = binom_survival(n, k, p)?;
    let survival_strict = binom_survival(n, k + 1, p)?;
    Ok(SignificanceReport {
        n,
        k,
        p,
        frames,
        pmf,
        survival,
        survival_strict,
        frame_adjusted_pmf: frame_adjust(pmf, frames)?,
        frame_adjusted_survival: frame_adjust(survival, frames)?,
        frame_adjusted_survival_strict: frame_adjust(survival_strict, frames)?,
        independent_periods_variant: IndependentVariant {
            pmf: frame_adjust_independent(pmf, frames)?,
            survival: frame_adjust_independent(survival, frames)?,
            survival_strict: frame_adjust_independent(survival_strict, frames)?,
        },
    })
}

/// Mean over sample standard deviation of `strategy - benchmark`.
pub fn sharpe(strategy: &[f64], benchmark: &[f64]) -> Result<f64> {
    if strategy.len() != benchmark.len() {
        return Err(Error::DimensionMismatch {
            expected: strategy.len(),
            actual: benchmark.len(),
        });
    }
    let d: Vec<f64> = strategy.iter().zip(benchmark).map(|(a, b)| a - b).collect();
    sharpe_of_differential(&d)
}

pub fn sharpe_of_differential(d: &[f64]) -> Result<f64> {
    if d.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "{} periods; at least 2 required",
            d.len()
        )));
    }
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    let scale = d.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if sd <= 1e-12 * scale.max(f64::MIN_POSITIVE) || sd == 0.0 {
        return Err(Error::UndefinedRisk);
    }
    Ok(mean / sd)
}

/// Daily close-to-close returns of holding the benchmark over `period`.
/// The first return belongs to the second trading day.
pub fn benchmark_buy_and_hold(
    series: &PriceSeries,
    period: DateRange,
) -> Result<Vec<(NaiveDate, f64)>> {
    let closes = series.daily_closes(period.start, period.end);
    if closes.len() < 2 {
        return Err(Error::MissingData(format!(
            "benchmark has {} trading days in {}..{}; at least 2 required",
            closes.len(),
            period.start,
            period.end
        )));
    }
    Ok(closes
        .windows(2)
        .map(|w| (w[1].0, w[1].1.ratio(w[0].1) - 1.0))
        .collect())
}
