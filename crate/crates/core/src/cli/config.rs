//! Run configuration: a flat TOML file whose keys can all be overridden by
//! command-line flags. The SHA-256 of the effective configuration and the
//! seed are stamped on every output file.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backtest::BacktestConfig;
use crate::error::{Error, Result};
use crate::labeler::DateRange;
use crate::models::{LrParams, ModelKind, ModelParams};
use crate::pipeline::PipelineConfig;
use crate::select::Ranker;
use crate::vectorizer::StockFeature;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tickers: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tweets: Option<PathBuf>,
    /// May contain `{ticker}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bars: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub benchmark_bars: Option<PathBuf>,
    /// Labeled dataset; may contain `{ticker}`. Defaults to the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labeled: Option<PathBuf>,
    /// Model file; may contain `{ticker}`. Defaults to the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positive: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative: Option<PathBuf>,
    pub model: ModelKind,
    pub ranker: Ranker,
    pub k: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub tolerance: f64,
    pub max_iters: usize,
    pub threshold: f64,
    pub train_fraction: f64,
    /// Months of history before the test period used for training.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub training_window_months: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_start: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_end: Option<NaiveDate>,
    pub seed: u64,
    pub fee_rate: f64,
    pub margin: f64,
    pub shares: i64,
    pub max_cashtags: usize,
    pub stock_features: Vec<StockFeature>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let lr = LrParams::default();
        let backtest = BacktestConfig::default();
        RunConfig {
            tickers: vec!["SYN".into()],
            tweets: None,
            bars: None,
            benchmark_bars: None,
            labeled: None,
            model_file: None,
            lexicon: None,
            positive: None,
            negative: None,
            model: ModelKind::Mnb,
            ranker: Ranker::ChiSquared,
            k: 5000,
            alpha: 1.0,
            lambda: lr.lambda,
            tolerance: lr.tolerance,
            max_iters: lr.max_iters,
            threshold: backtest.threshold,
            train_fraction: 0.8,
            training_window_months: Some(3),
            test_start: None,
            test_end: None,
            seed: 42,
            fee_rate: backtest.monthly_fee_rate,
            margin: backtest.margin,
            shares: backtest.shares,
            max_cashtags: crate::ingest::DEFAULT_MAX_CASHTAGS,
            stock_features: StockFeature::ALL.to_vec(),
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Flags that override configuration keys.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub tickers: Option<Vec<String>>,
    #[arg(long)]
    pub tweets: Option<PathBuf>,
    /// Minute-bar CSV; `{ticker}` is replaced per ticker
    #[arg(long)]
    pub bars: Option<PathBuf>,
    #[arg(long)]
    pub benchmark_bars: Option<PathBuf>,
    #[arg(long)]
    pub labeled: Option<PathBuf>,
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Scored lexicon TSV (`term<TAB>score`)
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Positive word list, one word per line
    #[arg(long)]
    pub positive: Option<PathBuf>,
    /// Negative word list, one word per line
    #[arg(long)]
    pub negative: Option<PathBuf>,
    /// mnb or lr
    #[arg(long)]
    pub model: Option<String>,
    /// cs, fv, mi or rfe
    #[arg(long)]
    pub ranker: Option<String>,
    /// Number of word features kept
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// 0 trains on all history before the test period
    #[arg(long)]
    pub training_window_months: Option<u32>,
    #[arg(long)]
    pub test_start: Option<NaiveDate>,
    #[arg(long)]
    pub test_end: Option<NaiveDate>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub fee_rate: Option<f64>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub shares: Option<i64>,
    #[arg(long)]
    pub max_cashtags: Option<usize>,
    /// Comma-separated subset of price_trend, volume_int, volume_binary, weekday
    #[arg(long, value_delimiter = ',')]
    pub stock_features: Option<Vec<String>>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

macro_rules! apply {
    ($cfg:ident, $ov:ident; $($field:ident),*) => {
        $(if let Some(v) = $ov.$field.clone() { $cfg.$field = v; })*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Reads `--config` if given, then applies every other flag on top.
    pub fn resolve(ov: &Overrides) -> Result<Self> {
        let mut cfg = match &ov.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        apply!(cfg, ov; tickers, k, alpha, lambda, tolerance, max_iters, threshold, train_fraction,
            seed, fee_rate, margin, shares, max_cashtags, out_dir);
        for (slot, v) in [
            (&mut cfg.tweets, &ov.tweets),
            (&mut cfg.bars, &ov.bars),
            (&mut cfg.benchmark_bars, &ov.benchmark_bars),
            (&mut cfg.labeled, &ov.labeled),
            (&mut cfg.model_file, &ov.model_file),
            (&mut cfg.lexicon, &ov.lexicon),
            (&mut cfg.positive, &ov.positive),
            (&mut cfg.negative, &ov.negative),
        ] {
            if v.is_some() {
                slot.clone_from(v);
            }
        }
        if let Some(m) = &ov.model {
            cfg.model = m.parse()?;
        }
        if let Some(r) = &ov.ranker {
            cfg.ranker = r.parse()?;
        }
        if let Some(w) = ov.training_window_months {
            cfg.training_window_months = (w > 0).then_some(w);
        }
        if ov.test_start.is_some() {
            cfg.test_start = ov.test_start;
        }
        if ov.test_end.is_some() {
            cfg.test_end = ov.test_end;
        }
        if let Some(names) = &ov.stock_features {
            cfg.stock_features = names
                .iter()
                .filter(|n| !n.trim().is_empty())
                .map(|n| n.parse().map_err(|e: Error| Error::Config(e.to_string())))
                .collect::<Result<_>>()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.tickers.is_empty() {
            return bad("at least one ticker is required".into());
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return bad(format!("alpha {} must be > 0", self.alpha));
        }
        if self.lambda.is_nan() || self.lambda <= 0.0 {
            return bad(format!("lambda {} must be > 0", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold {} not in [0, 1]", self.threshold));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return bad(format!(
                "train_fraction {} not in (0, 1]",
                self.train_fraction
            ));
        }
        if self.shares <= 0 {
            return bad("shares must be positive".into());
        }
        if let (Some(s), Some(e)) = (self.test_start, self.test_end) {
            if s > e {
                return bad(format!("test_start {s} is after test_end {e}"));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Hex SHA-256 of the effective configuration.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn test_period(&self) -> Result<Option<DateRange>> {
        match (self.test_start, self.test_end) {
            (Some(s), Some(e)) => Ok(Some(DateRange::new(s, e))),
            (None, None) => Ok(None),
            _ => Err(Error::Config(
                "test_start and test_end must be given together".into(),
            )),
        }
    }

    pub fn require_test_period(&self) -> Result<DateRange> {
        self.test_period()?
            .ok_or_else(|| Error::Config("this command needs --test-start and --test-end".into()))
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            model: ModelParams {
                kind: self.model,
                alpha: self.alpha,
                lr: LrParams {
                    lambda: self.lambda,
                    tolerance: self.tolerance,
                    max_iters: self.max_iters,
                },
            },
            ranker: self.ranker,
            k: self.k,
            stock_features: self.stock_features.clone(),
        }
    }

    pub fn backtest(&self) -> BacktestConfig {
        BacktestConfig {
            threshold: self.threshold,
            shares: self.shares,
            margin: self.margin,
            monthly_fee_rate: self.fee_rate,
            ..BacktestConfig::default()
        }
    }

    fn per_ticker(template: &Path, ticker: &str) -> PathBuf {
        PathBuf::from(template.to_string_lossy().replace("{ticker}", ticker))
    }

    pub fn bars_path(&self, ticker: &str) -> Result<PathBuf> {
        self.bars
            .as_deref()
            .map(|p| Self::per_ticker(p, ticker))
            .ok_or_else(|| Error::Config("no bar file given (--bars)".into()))
    }

    pub fn tweets_path(&self) -> Result<&Path> {
        self.tweets
            .as_deref()
            .ok_or_else(|| Error::Config("no tweet file given (--tweets)".into()))
    }

    pub fn labeled_path(&self, ticker: &str) -> PathBuf {
        match &self.labeled {
            Some(p) => Self::per_ticker(p, ticker),
            None => self.out_dir.join(format!("labeled_{ticker}.jsonl")),
        }
    }

    pub fn model_path(&self, ticker: &str) -> PathBuf {
        match &self.model_file {
            Some(p) => Self::per_ticker(p, ticker),
            None => self.out_dir.join(format!("model_{ticker}.json")),
        }
    }
}
