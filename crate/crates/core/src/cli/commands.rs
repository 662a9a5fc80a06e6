use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::backtest::{
    aggregate, equity_svg, run_backtest, signals_from_lexicon, signals_from_model,
    write_equity_csv, write_trade_log, BacktestReport,
};
use crate::error::{Error, Result};
use crate::ingest::{
    parse_bars, parse_tweets, select_for_stock, spam_filter, SpamFilterOutcome, Tweet,
};
use crate::labeler::{
    label_with_context, read_labeled, split, temporal_distribution, write_histogram_csv,
    write_labeled, DateRange, LabeledDocument, PriceSeries, SignalClass,
};
use crate::lexicon::{load_scored, load_wordlists, skew_report, Lexicon};
use crate::models::{evaluate_predictions, ModelKind};
use crate::pipeline::{labels_of, write_dictionary_csv, TrainedModel};
use crate::select::Ranker;
use crate::stats::{benchmark_buy_and_hold, sharpe_of_differential, significance};
use crate::sweep::{feature_sweep, months_before, window_sweep};
use crate::synth::{benchmark_bars, generate, SynthSpec};
use crate::tokenizer::tokenize;

/// Config hash and seed stamped on every output.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(cfg: &RunConfig) -> Self {
        Provenance {
            config_hash: cfg.hash(),
            seed: cfg.seed,
        }
    }

    pub fn header(&self) -> String {
        format!("# config_hash={} seed={}", self.config_hash, self.seed)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let file = File::create(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    Ok(BufReader::new(file))
}

/// Text output whose first line is the provenance comment.
fn text_file(path: &Path, prov: &Provenance) -> Result<BufWriter<File>> {
    let mut w = create(path)?;
    writeln!(w, "{}", prov.header())?;
    Ok(w)
}

fn with_provenance<T: Serialize>(value: &T, prov: &Provenance) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    let p = serde_json::to_value(prov)?;
    Ok(match v {
        Value::Object(ref mut map) => {
            map.insert("provenance".into(), p);
            v
        }
        other => json!({ "provenance": p, "result": other }),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T, prov: &Provenance) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &with_provenance(value, prov)?)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn load_tweets(cfg: &RunConfig) -> Result<(SpamFilterOutcome, usize)> {
    let path = cfg.tweets_path()?;
    let parsed = parse_tweets(open(path)?)?;
    for e in parsed.errors.iter().take(5) {
        eprintln!("warning: {} line {}: {}", path.display(), e.line, e.message);
    }
    if parsed.errors.len() > 5 {
        eprintln!("warning: {} more malformed lines", parsed.errors.len() - 5);
    }
    let n_errors = parsed.errors.len();
    Ok((spam_filter(parsed.tweets, cfg.max_cashtags), n_errors))
}

fn load_series(path: &Path) -> Result<PriceSeries> {
    let bars = parse_bars(open(path)?).map_err(|e| match e {
        Error::Row { row, message } => Error::Row {
            row,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })?;
    Ok(PriceSeries::new(bars))
}

/// Fails when a month of `period` has weekdays but no bars.
fn check_coverage(series: &PriceSeries, period: DateRange, source: &Path) -> Result<()> {
    let mut month = NaiveDate::from_ymd_opt(period.start.year(), period.start.month(), 1)
        .expect("first of month");
    while month <= period.end {
        let next = month
            .checked_add_months(chrono::Months::new(1))
            .expect("date in range");
        let from = month.max(period.start);
        let to = next.pred_opt().expect("date in range").min(period.end);
        let weekdays = from
            .iter_days()
            .take_while(|d| *d <= to)
            .any(|d| !crate::ingest::calendar::is_weekend(d));
        let traded = series.calendar().days().any(|d| d >= from && d <= to);
        if weekdays && !traded {
            return Err(Error::MissingData(format!(
                "{} has no bars between {from} and {to}, inside the test period {}..{}",
                source.display(),
                period.start,
                period.end
            )));
        }
        month = next;
    }
    Ok(())
}

fn load_labeled(cfg: &RunConfig, ticker: &str) -> Result<Vec<LabeledDocument>> {
    let path = cfg.labeled_path(ticker);
    if !path.exists() {
        return Err(Error::Config(format!(
            "no labeled data at {}; run `pricesent label` first",
            path.display()
        )));
    }
    read_labeled(open(&path)?)
}

fn load_model(cfg: &RunConfig, ticker: &str) -> Result<TrainedModel> {
    let path = cfg.model_path(ticker);
    if !path.exists() {
        return Err(Error::Config(format!(
            "no model at {}; run `pricesent train` first",
            path.display()
        )));
    }
    TrainedModel::load(&path)
}

/// Documents available for training: everything when no test period is set,
/// otherwise those before it and inside the training window.
pub fn training_pool(cfg: &RunConfig, docs: &[LabeledDocument]) -> Result<Vec<LabeledDocument>> {
    let Some(period) = cfg.test_period()? else {
        return Ok(docs.to_vec());
    };
    Ok(docs
        .iter()
        .filter(|d| {
            let date = d.timestamp.date();
            date < period.start
                && cfg
                    .training_window_months
                    .is_none_or(|w| months_before(date, period.start) <= i64::from(w))
        })
        .cloned()
        .collect())
}

fn train_validation(
    cfg: &RunConfig,
    docs: &[LabeledDocument],
) -> Result<(Vec<LabeledDocument>, Vec<LabeledDocument>)> {
    let pool = training_pool(cfg, docs)?;
    let s = split(&pool, cfg.train_fraction, cfg.seed, None)?;
    Ok((s.train, s.validation))
}

fn test_docs(docs: &[LabeledDocument], period: DateRange) -> Vec<LabeledDocument> {
    docs.iter()
        .filter(|d| period.contains(d.timestamp.date()))
        .cloned()
        .collect()
}

#[derive(Debug, Serialize)]
struct LabelSummary {
    ticker: String,
    tweets_total: usize,
    malformed_lines: usize,
    spam_removed: usize,
    spam_removed_fraction: f64,
    mentioning_ticker: usize,
    labeled: usize,
    buy: usize,
    sell: usize,
    skipped: BTreeMap<String, usize>,
}

pub fn label(cfg: &RunConfig) -> Result<()> {
    let prov = Provenance::of(cfg);
    let (spam, malformed) = load_tweets(cfg)?;
    for ticker in &cfg.tickers {
        let bars_path = cfg.bars_path(ticker)?;
        let series = load_series(&bars_path)?;
        if let Some(period) = cfg.test_period()? {
            check_coverage(&series, period, &bars_path)?;
        }
        let mentioning = select_for_stock(&spam.kept, ticker);
        let out = label_with_context(mentioning.iter().copied(), ticker, &series);
        let buy = out.docs.iter().filter(|d| d.label.is_buy()).count();

        let mut w = text_file(&cfg.labeled_path(ticker), &prov)?;
        write_labeled(&mut w, &out.docs)?;
        w.flush()?;
        let hist = temporal_distribution(&out.docs);
        for (name, counts) in [("hour", &hist.by_hour), ("weekday", &hist.by_weekday)] {
            let mut w = text_file(
                &cfg.out_dir.join(format!("hist_{name}_{ticker}.csv")),
                &prov,
            )?;
            write_histogram_csv(&mut w, counts)?;
            w.flush()?;
        }
        let summary = LabelSummary {
            ticker: ticker.clone(),
            tweets_total: spam.total,
            malformed_lines: malformed,
            spam_removed: spam.removed,
            spam_removed_fraction: spam.removal_fraction(),
            mentioning_ticker: mentioning.len(),
            labeled: out.docs.len(),
            buy,
            sell: out.docs.len() - buy,
            skipped: out
                .skipped
                .iter()
                .map(|(r, n)| (r.to_string(), *n))
                .collect(),
        };
        write_json(
            &cfg.out_dir.join(format!("label_summary_{ticker}.json")),
            &summary,
            &prov,
        )?;
        println!(
            "{ticker}: {} labeled ({} buy, {} sell) from {} tweets; spam removed {:.1}%",
            summary.labeled,
            summary.buy,
            summary.sell,
            summary.mentioning_ticker,
            100.0 * summary.spam_removed_fraction
        );
    }
    Ok(())
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let prov = Provenance::of(cfg);
    let pipeline = cfg.pipeline();
    for ticker in &cfg.tickers {
        let docs = load_labeled(cfg, ticker)?;
        let (train, validation) = train_validation(cfg, &docs)?;
        let model = TrainedModel::fit(&pipeline, &train)?;
        if let Some(note) = &model.note {
            eprintln!("note: {ticker}: {note}");
        }
        write_json(&cfg.model_path(ticker), &model, &prov)?;
        let mut w = text_file(&cfg.out_dir.join(format!("dictionary_{ticker}.csv")), &prov)?;
        write_dictionary_csv(&mut w, &model.dictionary())?;
        w.flush()?;
        if validation.is_empty() {
            println!(
                "{ticker}: trained on {} documents; no validation split",
                train.len()
            );
            continue;
        }
        let report = model.evaluate(&validation)?;
        write_json(
            &cfg.out_dir.join(format!("validation_{ticker}.json")),
            &json!({ "ticker": ticker, "n_train": train.len(), "report": report }),
            &prov,
        )?;
        println!(
            "{ticker}: {} {} k={} trained on {}, validation accuracy {:.4} (n={})",
            pipeline.model.kind,
            pipeline.ranker,
            pipeline.k,
            train.len(),
            report.accuracy,
            report.n
        );
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Baseline {
    AlwaysBuy,
    AlwaysSell,
}

pub fn evaluate(cfg: &RunConfig, baseline: Option<Baseline>) -> Result<()> {
    let prov = Provenance::of(cfg);
    for ticker in &cfg.tickers {
        let docs = load_labeled(cfg, ticker)?;
        let (set, docs) = match cfg.test_period()? {
            Some(period) => ("test", test_docs(&docs, period)),
            None => ("validation", train_validation(cfg, &docs)?.1),
        };
        let model = load_model(cfg, ticker)?;
        let report = model.evaluate(&docs)?;
        let baseline_report = baseline
            .map(|b| {
                let class = match b {
                    Baseline::AlwaysBuy => SignalClass::Buy,
                    Baseline::AlwaysSell => SignalClass::Sell,
                };
                evaluate_predictions(&vec![class; docs.len()], &labels_of(&docs))
            })
            .transpose()?;
        write_json(
            &cfg.out_dir.join(format!("evaluation_{ticker}.json")),
            &json!({ "ticker": ticker, "set": set, "report": report, "baseline": baseline_report }),
            &prov,
        )?;
        let rate = |r: Option<f64>| r.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        println!(
            "{ticker}: {set} accuracy {:.4} (n={}), tbr {}, tsr {}",
            report.accuracy,
            report.n,
            rate(report.tbr),
            rate(report.tsr)
        );
        if let Some(b) = baseline_report {
            println!("{ticker}: baseline accuracy {:.4}", b.accuracy);
        }
    }
    Ok(())
}

pub fn sweep_features(
    cfg: &RunConfig,
    sizes: &[usize],
    models: &[ModelKind],
    rankers: &[Ranker],
) -> Result<()> {
    let prov = Provenance::of(cfg);
    for ticker in &cfg.tickers {
        let docs = load_labeled(cfg, ticker)?;
        let (train, validation) = train_validation(cfg, &docs)?;
        let sweep = feature_sweep(&train, &validation, &cfg.pipeline(), models, rankers, sizes)?;
        let mut w = text_file(
            &cfg.out_dir.join(format!("sweep_features_{ticker}.csv")),
            &prov,
        )?;
        sweep.write_csv(&mut w)?;
        w.flush()?;
        write_json(
            &cfg.out_dir.join(format!("sweep_features_{ticker}.json")),
            &sweep,
            &prov,
        )?;
        for s in &sweep.skipped {
            eprintln!("warning: {ticker}: skipped {s:?}");
        }
        if let Some(best) = sweep.best() {
            println!(
                "{ticker}: {} cells, best {} {} {} accuracy {:.4}",
                sweep.cells.len(),
                best.model,
                best.ranker,
                best.size,
                best.accuracy
            );
        }
    }
    Ok(())
}

pub fn sweep_window(cfg: &RunConfig, max_months: u32) -> Result<()> {
    let prov = Provenance::of(cfg);
    let period = cfg.require_test_period()?;
    for ticker in &cfg.tickers {
        let docs = load_labeled(cfg, ticker)?;
        let validation = test_docs(&docs, period);
        let history: Vec<LabeledDocument> = docs
            .iter()
            .filter(|d| d.timestamp.date() < period.start)
            .cloned()
            .collect();
        let sweep = window_sweep(
            &history,
            &validation,
            period.start,
            &cfg.pipeline(),
            max_months,
        )?;
        let mut w = text_file(
            &cfg.out_dir.join(format!("sweep_window_{ticker}.csv")),
            &prov,
        )?;
        sweep.write_csv(&mut w)?;
        w.flush()?;
        write_json(
            &cfg.out_dir.join(format!("sweep_window_{ticker}.json")),
            &sweep,
            &prov,
        )?;
        for c in &sweep.cells {
            match c.accuracy {
                Some(a) => println!(
                    "{ticker}: {:>2} months  accuracy {a:.4}  n_train {}",
                    c.months, c.n_train
                ),
                None => println!("{ticker}: {:>2} months  missing", c.months),
            }
        }
        if let Some(p) = sweep.peak() {
            println!("{ticker}: peak at {} months", p.months);
        }
    }
    Ok(())
}

/// Signal source for the backtest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Method {
    /// Trained classifier
    A,
    /// Scored lexicon
    B,
    /// Positive and negative word lists
    C,
}

impl Method {
    pub fn code(self) -> &'static str {
        match self {
            Method::A => "a",
            Method::B => "b",
            Method::C => "c",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::A => "A (model)",
            Method::B => "B (scored lexicon)",
            Method::C => "C (word lists)",
        }
    }
}

fn load_lexicon(cfg: &RunConfig, method: Method) -> Result<Lexicon> {
    let loaded = match method {
        Method::B => {
            let path = cfg
                .lexicon
                .as_deref()
                .ok_or_else(|| Error::Config("method b needs --lexicon".into()))?;
            load_scored(open(path)?, &path.display().to_string())?
        }
        _ => {
            let (Some(pos), Some(neg)) = (cfg.positive.as_deref(), cfg.negative.as_deref()) else {
                return Err(Error::Config(
                    "method c needs --positive and --negative".into(),
                ));
            };
            load_wordlists(open(pos)?, open(neg)?, "word lists")?
        }
    };
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded.lexicon)
}

pub fn backtest(cfg: &RunConfig, methods: &[Method]) -> Result<()> {
    let prov = Provenance::of(cfg);
    let period = cfg.require_test_period()?;
    let mut methods = methods.to_vec();
    methods.sort_unstable();
    methods.dedup();
    let mut lexicons = BTreeMap::new();
    for &m in methods.iter().filter(|m| **m != Method::A) {
        lexicons.insert(m, load_lexicon(cfg, m)?);
    }
    let (spam, _) = load_tweets(cfg)?;
    let bt = cfg.backtest();
    for ticker in &cfg.tickers {
        let bars_path = cfg.bars_path(ticker)?;
        let series = load_series(&bars_path)?;
        check_coverage(&series, period, &bars_path)?;
        let tweets: Vec<&Tweet> = select_for_stock(&spam.kept, ticker)
            .into_iter()
            .filter(|t| period.contains(t.local_time().date()))
            .collect();
        let mut reports = Vec::new();
        for &m in &methods {
            let signals = match m {
                Method::A => signals_from_model(&tweets, &load_model(cfg, ticker)?, &series)?,
                _ => {
                    let lexicon = &lexicons[&m];
                    let classes: Vec<_> = tweets
                        .iter()
                        .map(|t| lexicon.classify(&tokenize(&t.text)))
                        .collect();
                    if !classes.is_empty() {
                        write_json(
                            &cfg.out_dir.join(format!("skew_{ticker}_{}.json", m.code())),
                            &skew_report(&classes)?,
                            &prov,
                        )?;
                    }
                    signals_from_lexicon(&tweets, lexicon)
                }
            };
            let report = run_backtest(ticker, m.code(), &signals, &series, period, &bt)?;
            let mut w = text_file(
                &cfg.out_dir
                    .join(format!("trades_{ticker}_{}.csv", m.code())),
                &prov,
            )?;
            write_trade_log(&mut w, &report.trades)?;
            w.flush()?;
            write_json(
                &cfg.out_dir
                    .join(format!("backtest_{ticker}_{}.json", m.code())),
                &report,
                &prov,
            )?;
            if report.one_sided {
                eprintln!(
                    "warning: {ticker} method {}: {:.1}% of trades were Buy",
                    m.code(),
                    100.0 * report.buy_share.unwrap_or(0.0)
                );
            }
            println!(
                "{ticker} {:<20} trades {:>4}  correct {:>6}  gross {:>12}  return {:>8.4}%  net {:>8.4}%",
                m.label(),
                report.trades.len(),
                report
                    .breakdown
                    .correct_pct
                    .map_or("n/a".into(), |p| format!("{p:.1}%")),
                report.gross_pnl.to_string(),
                100.0 * report.return_rate,
                100.0 * report.net_return_rate
            );
            reports.push((m, report));
        }
        let series_refs: Vec<(&str, &BacktestReport)> =
            reports.iter().map(|(m, r)| (m.label(), r)).collect();
        let mut w = text_file(&cfg.out_dir.join(format!("equity_{ticker}.csv")), &prov)?;
        write_equity_csv(&mut w, &series_refs)?;
        w.flush()?;
        let svg = equity_svg(&format!("{ticker} cumulative P&L"), &series_refs);
        let svg = svg.replacen(
            '>',
            &format!(
                ">\n<!-- config_hash={} seed={} -->",
                prov.config_hash, prov.seed
            ),
            1,
        );
        fs::write(cfg.out_dir.join(format!("equity_{ticker}.svg")), svg)?;
    }
    Ok(())
}

pub fn significance_cmd(n: u64, k: u64, p: f64, frames: f64) -> Result<()> {
    print_json(&significance(n, k, p, frames)?)
}

#[derive(Debug, Serialize)]
struct SharpeOutput {
    periods: usize,
    mean_differential: f64,
    sd_differential: f64,
    sharpe: f64,
}

fn sharpe_output(d: &[f64]) -> Result<SharpeOutput> {
    let sharpe = sharpe_of_differential(d)?;
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(SharpeOutput {
        periods: d.len(),
        mean_differential: mean,
        sd_differential: sd,
        sharpe,
    })
}

pub fn sharpe_cmd(
    cfg: &RunConfig,
    returns: Option<&[f64]>,
    benchmark: Option<&[f64]>,
    report: Option<&Path>,
) -> Result<()> {
    let d: Vec<f64> = match (returns, benchmark, report) {
        (Some(r), Some(b), None) => {
            if r.len() != b.len() {
                return Err(Error::DimensionMismatch {
                    expected: r.len(),
                    actual: b.len(),
                });
            }
            r.iter().zip(b).map(|(x, y)| x - y).collect()
        }
        (None, None, Some(path)) => {
            let report: BacktestReport = serde_json::from_reader(open(path)?)?;
            let bench_path = cfg
                .benchmark_bars
                .as_deref()
                .ok_or_else(|| Error::Config("--report needs --benchmark-bars".into()))?;
            let bench = benchmark_buy_and_hold(&load_series(bench_path)?, report.period)?;
            let strategy: BTreeMap<NaiveDate, f64> = report.daily_returns.iter().copied().collect();
            let d: Vec<f64> = bench
                .iter()
                .filter_map(|(date, b)| strategy.get(date).map(|s| s - b))
                .collect();
            if d.len() < bench.len() {
                eprintln!(
                    "warning: {} benchmark days have no strategy return and were dropped",
                    bench.len() - d.len()
                );
            }
            d
        }
        _ => {
            return Err(Error::Config(
                "give either --returns with --benchmark-returns, or --report".into(),
            ))
        }
    };
    print_json(&sharpe_output(&d)?)
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct SynthArgs {
    /// TOML file with generator settings
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub ticker: Option<String>,
    #[arg(long)]
    pub n_tweets: Option<usize>,
    #[arg(long)]
    pub start: Option<NaiveDate>,
    #[arg(long)]
    pub end: Option<NaiveDate>,
    #[arg(long)]
    pub signal_strength: Option<f64>,
    #[arg(long)]
    pub noise_words: Option<usize>,
    /// Planted word lists swap before this date
    #[arg(long)]
    pub flip_date: Option<NaiveDate>,
}

pub fn synth_cmd(out_dir: &Path, seed: Option<u64>, args: &SynthArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            toml::from_str::<SynthSpec>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => SynthSpec::default(),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(t) = &args.ticker {
        spec.ticker = t.to_ascii_uppercase();
    }
    if let Some(n) = args.n_tweets {
        spec.n_tweets = n;
    }
    if let Some(d) = args.start {
        spec.start = d;
    }
    if let Some(d) = args.end {
        spec.end = d;
    }
    if let Some(s) = args.signal_strength {
        spec.signal_strength = s;
    }
    if let Some(n) = args.noise_words {
        spec.n_noise_words = n;
    }
    if args.flip_date.is_some() {
        spec.flip_date = args.flip_date;
    }
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    let spec_toml = toml::to_string(&spec).map_err(|e| Error::Config(e.to_string()))?;
    let prov = Provenance {
        config_hash: hex::encode(Sha256::digest(spec_toml.as_bytes())),
        seed: spec.seed,
    };
    let corpus = generate(&spec)?;
    corpus.write_to(out_dir, Some(&prov.header()))?;
    let bench = benchmark_bars(
        spec.seed.wrapping_add(1),
        spec.start,
        spec.end,
        spec.volatility,
    )?;
    let mut w = text_file(&out_dir.join("benchmark.csv"), &prov)?;
    crate::ingest::serialize_bars(&mut w, &bench)?;
    w.flush()?;
    fs::write(out_dir.join("synth_spec.toml"), &spec_toml)?;
    write_json(
        &out_dir.join("synth_summary.json"),
        &json!({
            "ticker": spec.ticker,
            "tweets": corpus.tweets.len(),
            "bars": corpus.bars.len(),
            "empirical_strength": corpus.empirical_strength(),
        }),
        &prov,
    )?;
    println!(
        "{} tweets and {} bars for {} written to {} (empirical strength {:.3})",
        corpus.tweets.len(),
        corpus.bars.len(),
        spec.ticker,
        out_dir.display(),
        corpus.empirical_strength()
    );
    Ok(())
}

fn backtest_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("backtest_") && n.ends_with(".json"))
        })
        .collect();
    out.sort();
    Ok(out)
}

pub fn report(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<()> {
    let prov = Provenance::of(cfg);
    let paths = if inputs.is_empty() {
        backtest_files(&cfg.out_dir)?
    } else {
        inputs.to_vec()
    };
    if paths.is_empty() {
        return Err(Error::Config(format!(
            "no backtest_*.json files in {}; run `pricesent backtest` first",
            cfg.out_dir.display()
        )));
    }
    let mut by_method: BTreeMap<String, Vec<BacktestReport>> = BTreeMap::new();
    for p in &paths {
        let r: BacktestReport = serde_json::from_reader(open(p)?)
            .map_err(|e| Error::Config(format!("{}: not a backtest report: {e}", p.display())))?;
        by_method.entry(r.method.clone()).or_default().push(r);
    }
    let mut out = serde_json::Map::new();
    println!("method  tickers  trades  correct  gross_pnl     equal_wt  account_wt  net_equal_wt  p(X>=correct)");
    for (method, reports) in &by_method {
        let agg = aggregate(reports)?;
        let sig = (agg.trades > 0)
            .then(|| significance(agg.trades as u64, agg.correct as u64, 0.5, 1.0))
            .transpose()?;
        println!(
            "{method:<7} {:>7}  {:>6}  {:>7}  {:>12}  {:>7.4}%  {:>9.4}%  {:>11.4}%  {}",
            agg.tickers.len(),
            agg.trades,
            agg.correct,
            agg.gross_pnl.to_string(),
            100.0 * agg.equal_weight_return,
            100.0 * agg.account_weighted_return,
            100.0 * agg.equal_weight_net_return,
            sig.as_ref()
                .map_or("n/a".into(), |s| format!("{:.3e}", s.survival))
        );
        let per_ticker: Vec<Value> = reports
            .iter()
            .map(|r| {
                json!({
                    "ticker": r.ticker,
                    "trades": r.trades.len(),
                    "breakdown": r.breakdown,
                    "gross_pnl": r.gross_pnl,
                    "return_rate": r.return_rate,
                    "net_return_rate": r.net_return_rate,
                    "annualized": r.annualized,
                    "one_sided": r.one_sided,
                })
            })
            .collect();
        out.insert(
            method.clone(),
            json!({ "aggregate": agg, "significance": sig, "tickers": per_ticker }),
        );
    }
    write_json(&cfg.out_dir.join("report.json"), &Value::Object(out), &prov)?;
    Ok(())
}
