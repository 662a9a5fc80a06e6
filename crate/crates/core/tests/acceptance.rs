//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed; the process
//! exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::{NaiveDate, NaiveDateTime};
use clap::Parser;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use pricesent::backtest::{
    account_size, breakdown, compute_returns, look_ahead_free, run_backtest, signals_from_model,
    trade_pnl, write_trade_log, BacktestConfig, BacktestReport, Trade,
};
use pricesent::cli::{run, Cli};
use pricesent::ingest::Tweet;
use pricesent::labeler::{
    label_with_context, split, DateRange, LabeledDocument, PriceSeries, SignalClass,
};
use pricesent::models::{lr_cost_gradient, train_lr, train_mnb, LrParams};
use pricesent::money::Usd;
use pricesent::pipeline::{labels_of, PipelineConfig, TrainedModel};
use pricesent::select::{chi2_scores, f_scores, mi_scores, Ranker};
use pricesent::stats::{binom_pmf, binom_survival, frame_adjust, significance};
use pricesent::sweep::{feature_sweep, window_sweep, DEFAULT_SWEEP_SIZES};
use pricesent::synth::{generate, recovery_score, SynthCorpus, SynthSpec};
use pricesent::tokenizer::tokenize;
use pricesent::vectorizer::{DocTermMatrix, Vocabulary};

/// Published frame factor: 85 selectable windows over 20 tested.
const FRAMES: f64 = 85.0 / 20.0;

struct Criterion {
    id: u32,
    title: &'static str,
    started: Instant,
    checks: Vec<(bool, String)>,
}

impl Criterion {
    fn new(id: u32, title: &'static str) -> Self {
        Criterion {
            id,
            title,
            started: Instant::now(),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        self.checks.push((ok, detail.into()));
    }

    fn near(&mut self, what: &str, actual: f64, expected: f64, tol: f64) {
        let ok = (actual - expected).abs() <= tol;
        self.check(ok, format!("{what}: {actual:.6} vs {expected} (tol {tol})"));
    }

    fn within(&mut self, limit: Duration) {
        let took = self.started.elapsed();
        self.check(took < limit, format!("runtime {took:.2?} < {limit:?}"));
    }

    fn finish(self) -> bool {
        let ok = self.checks.iter().all(|c| c.0);
        for (pass, detail) in &self.checks {
            println!("    [{}] {detail}", if *pass { "ok" } else { "FAILED" });
        }
        println!(
            "ACCEPTANCE {}: {} ({})",
            self.id,
            if ok { "PASS" } else { "FAIL" },
            self.title
        );
        ok
    }
}

fn pct(x: f64) -> f64 {
    100.0 * x
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn usd(s: &str) -> Usd {
    s.parse().expect("amount")
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn c1() -> bool {
    let mut c = Criterion::new(1, "account and return arithmetic");
    let account = account_size(usd("122.00"), 100, 0.10).unwrap();
    c.check(
        account == usd("13420.00"),
        format!("account size {account} == 13420.00"),
    );
    let r = compute_returns(usd("729.50"), account, 0.0096).unwrap();
    c.near("monthly return %", pct(r.return_rate), 5.44, 0.01);
    c.check(
        round2(pct(r.net_return_rate)) == 4.48,
        format!("net return {:.4}% rounds to 4.48%", pct(r.net_return_rate)),
    );
    let annual = pct((1.0 + 0.0544_f64).powi(12) - 1.0);
    c.near("annualized of 5.44% (computed)", annual, 88.8, 0.05);
    c.near("annualized of 5.44% vs published", annual, 88.6, 0.5);
    c.near(
        "annualized of exact rate vs published",
        pct(r.annualized),
        88.6,
        0.5,
    );
    c.within(Duration::from_secs(1));
    c.finish()
}

fn c2() -> bool {
    let mut c = Criterion::new(2, "fee table identity");
    let account = usd("13420.00");
    for (gross, net) in [(5.44, 4.48), (9.68, 8.72), (1.0, 0.04), (-3.12, -4.08)] {
        let pnl = Usd::from_f64_rounded(gross / 100.0 * account.to_f64());
        let r = compute_returns(pnl, account, 0.0096).unwrap();
        let g = round2(pct(r.return_rate));
        let n = round2(pct(r.net_return_rate));
        c.check(
            g == gross && n == net,
            format!("gross {g}% -> net {n}% (published {net}%)"),
        );
    }
    c.finish()
}

fn c3() -> bool {
    let mut c = Criterion::new(3, "binomial significance");
    let pmf = binom_pmf(468, 253, 0.5).unwrap();
    c.near("P(X = 253) %", pct(pmf), 0.789, 0.02);
    c.near(
        "P(X = 253) x frames %",
        pct(frame_adjust(pmf, FRAMES).unwrap()),
        3.35,
        0.1,
    );
    let tail = binom_survival(468, 254, 0.5).unwrap();
    c.near("P(X >= 254) %", pct(tail), 3.57, 0.2);
    c.near(
        "P(X >= 254) x frames %",
        pct(frame_adjust(tail, FRAMES).unwrap()),
        15.2,
        0.8,
    );
    let report = significance(468, 253, 0.5, FRAMES).unwrap();
    c.check(
        report.survival == binom_survival(468, 253, 0.5).unwrap() && report.survival_strict == tail,
        format!(
            "report carries both tails: >=253 {:.4}%, >=254 {:.4}%",
            pct(report.survival),
            pct(report.survival_strict)
        ),
    );
    c.within(Duration::from_secs(1));
    c.finish()
}

/// Per-stock rows: placed and correct for Buy, then for Sell, with the
/// printed percentages (buy placed, buy correct, sell placed, sell correct).
const TABLE: [(&str, [usize; 4], [f64; 4]); 4] = [
    ("AAPL", [51, 32, 69, 45], [42.5, 62.7, 57.5, 65.2]),
    ("TSLA", [79, 45, 41, 23], [65.8, 60.0, 34.2, 56.1]),
    ("TWTR", [9, 6, 111, 52], [7.5, 66.7, 92.5, 46.8]),
    ("FB", [23, 15, 85, 35], [21.3, 65.2, 78.7, 41.1]),
];

fn constructed_log(ticker: &str, counts: [usize; 4]) -> Vec<Trade> {
    let t0 = NaiveDate::from_ymd_opt(2017, 1, 3)
        .unwrap()
        .and_hms_opt(10, 0, 0)
        .unwrap();
    let mut trades = Vec::new();
    for (direction, placed, correct) in [
        (SignalClass::Buy, counts[0], counts[1]),
        (SignalClass::Sell, counts[2], counts[3]),
    ] {
        for i in 0..placed {
            let entry = usd("100.00");
            let up = (i < correct) == direction.is_buy();
            let exit = if up { usd("101.00") } else { usd("99.00") };
            trades.push(Trade {
                ticker: ticker.into(),
                decision_time: t0,
                direction,
                shares: 100,
                entry,
                exit,
                pnl: trade_pnl(direction, entry, exit, 100),
                tweet_count: 1,
                buy_fraction: if direction.is_buy() { 1.0 } else { 0.0 },
                latest_doc: t0,
            });
        }
    }
    trades
}

fn c4() -> bool {
    let mut c = Criterion::new(4, "trade breakdown table consistency");
    let (mut placed, mut correct) = (0, 0);
    for (ticker, counts, printed) in TABLE {
        let b = breakdown(&constructed_log(ticker, counts));
        let cells = [
            ("Buy placed", b.buy.placed_pct),
            ("Buy correct", b.buy.correct_pct.unwrap_or(f64::NAN)),
            ("Sell placed", b.sell.placed_pct),
            ("Sell correct", b.sell.correct_pct.unwrap_or(f64::NAN)),
        ];
        for ((name, actual), expected) in cells.into_iter().zip(printed) {
            c.near(&format!("{ticker} {name} %"), actual, expected, 0.1);
        }
        placed += b.placed;
        correct += b.correct;
    }
    c.check(
        placed == 468 && correct == 253,
        format!("total {correct}/{placed}"),
    );
    c.near(
        "total correct %",
        100.0 * correct as f64 / placed as f64,
        54.06,
        0.005,
    );
    c.finish()
}

fn random_corpus() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<SignalClass>)> {
    (3usize..=20, 1usize..=5).prop_flat_map(|(n, f)| {
        let cell =
            prop_oneof![3 => Just(0.0), 2 => (1u32..4).prop_map(f64::from), 1 => 0.0..1.0f64];
        (
            proptest::collection::vec(proptest::collection::vec(cell, f), n),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_filter_map("both classes", |(rows, buy)| {
                let labels: Vec<SignalClass> = buy
                    .iter()
                    .map(|&b| {
                        if b {
                            SignalClass::Buy
                        } else {
                            SignalClass::Sell
                        }
                    })
                    .collect();
                let n_buy = buy.iter().filter(|b| **b).count();
                (n_buy > 0 && n_buy < buy.len()).then_some((rows, labels))
            })
    })
}

/// N (AD - BC)^2 / ((A+B)(C+D)(A+C)(B+D)) on the presence table.
fn chi2_oracle(col: &[f64], labels: &[SignalClass]) -> f64 {
    let (mut a, mut b, mut cc, mut d) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (&v, l) in col.iter().zip(labels) {
        match (v > 0.0, l.is_buy()) {
            (true, true) => a += 1.0,
            (true, false) => b += 1.0,
            (false, true) => cc += 1.0,
            (false, false) => d += 1.0,
        }
    }
    let n = a + b + cc + d;
    let denom = (a + b) * (cc + d) * (a + cc) * (b + d);
    if denom == 0.0 {
        0.0
    } else {
        n * (a * d - b * cc).powi(2) / denom
    }
}

/// H(class) + H(term) - H(class, term) from document counts, in nats.
fn mi_oracle(col: &[f64], labels: &[SignalClass]) -> f64 {
    let n = col.len() as f64;
    let entropy = |counts: &BTreeMap<(i8, i8), f64>| -> f64 {
        counts
            .values()
            .filter(|c| **c > 0.0)
            .map(|c| -(c / n) * (c / n).ln())
            .sum()
    };
    let mut joint = BTreeMap::new();
    let mut term = BTreeMap::new();
    let mut class = BTreeMap::new();
    for (&v, l) in col.iter().zip(labels) {
        let (t, k) = (i8::from(v > 0.0), i8::from(l.is_buy()));
        *joint.entry((t, k)).or_insert(0.0) += 1.0;
        *term.entry((t, 0)).or_insert(0.0) += 1.0;
        *class.entry((0, k)).or_insert(0.0) += 1.0;
    }
    (entropy(&term) + entropy(&class) - entropy(&joint)).max(0.0)
}

/// Textbook one-way ANOVA on the dense column. `None` when the classes are
/// separated with no within-class spread.
fn f_oracle(col: &[f64], labels: &[SignalClass]) -> Option<f64> {
    let groups: Vec<Vec<f64>> = [true, false]
        .iter()
        .map(|&buy| {
            col.iter()
                .zip(labels)
                .filter(|(_, l)| l.is_buy() == buy)
                .map(|(v, _)| *v)
                .collect()
        })
        .collect();
    let n = col.len() as f64;
    let grand = col.iter().sum::<f64>() / n;
    let mean = |g: &[f64]| g.iter().sum::<f64>() / g.len() as f64;
    let ssb: f64 = groups
        .iter()
        .map(|g| g.len() as f64 * (mean(g) - grand).powi(2))
        .sum();
    let ssw: f64 = groups
        .iter()
        .map(|g| {
            let m = mean(g);
            g.iter().map(|v| (v - m).powi(2)).sum::<f64>()
        })
        .sum();
    let sst = ssb + ssw;
    if sst == 0.0 || ssb <= 1e-12 * sst {
        Some(0.0)
    } else if ssw <= 1e-12 * sst {
        None
    } else {
        Some(ssb / (ssw / (n - 2.0)))
    }
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

fn c5() -> bool {
    let mut c = Criterion::new(5, "ranker oracles");
    let outcome = runner(200).run(&random_corpus(), |(rows, labels)| {
        let m = DocTermMatrix::from_dense(&rows);
        let chi = chi2_scores(&m, &labels).unwrap().scores;
        let mi = mi_scores(&m, &labels).unwrap().scores;
        let fv = f_scores(&m, &labels).unwrap().scores;
        let finite_max = (0..rows[0].len())
            .filter_map(|j| f_oracle(&column(&rows, j), &labels))
            .fold(0.0, f64::max);
        for j in 0..rows[0].len() {
            let col = column(&rows, j);
            let tol = |x: f64| 1e-9 * x.abs().max(1.0);
            let e_chi = chi2_oracle(&col, &labels);
            let e_mi = mi_oracle(&col, &labels);
            prop_assert!(
                (chi[j] - e_chi).abs() <= tol(e_chi),
                "chi2 {} vs {}",
                chi[j],
                e_chi
            );
            prop_assert!(
                (mi[j] - e_mi).abs() <= tol(e_mi),
                "mi {} vs {}",
                mi[j],
                e_mi
            );
            match f_oracle(&col, &labels) {
                Some(e) => prop_assert!((fv[j] - e).abs() <= tol(e), "F {} vs {}", fv[j], e),
                None => prop_assert!(
                    fv[j] > finite_max,
                    "separating feature {} <= {}",
                    fv[j],
                    finite_max
                ),
            }
        }
        Ok(())
    });
    c.check(
        outcome.is_ok(),
        format!("chi2, F, MI match brute force on 200 corpora: {outcome:?}"),
    );

    let labels = [
        SignalClass::Buy,
        SignalClass::Buy,
        SignalClass::Sell,
        SignalClass::Sell,
    ]
    .repeat(2);
    let independent: Vec<Vec<f64>> = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]
        .iter()
        .map(|v| vec![*v])
        .collect();
    let m = DocTermMatrix::from_dense(&independent);
    let chi = chi2_scores(&m, &labels).unwrap().scores[0];
    c.check(
        chi.abs() < 1e-12,
        format!("chi2 on independent feature = {chi}"),
    );
    let dependent: Vec<Vec<f64>> = labels
        .iter()
        .map(|l| vec![if l.is_buy() { 1.0 } else { 0.0 }])
        .collect();
    let mi = mi_scores(&DocTermMatrix::from_dense(&dependent), &labels)
        .unwrap()
        .scores[0];
    c.near(
        "MI on perfectly dependent balanced feature",
        mi,
        std::f64::consts::LN_2,
        1e-12,
    );
    c.finish()
}

fn small_problem() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<SignalClass>, f64)> {
    (4usize..=12, 1usize..=6).prop_flat_map(|(n, f)| {
        (
            proptest::collection::vec(
                proptest::collection::vec(prop_oneof![Just(0.0), 0.0..2.0f64], f),
                n,
            ),
            proptest::collection::vec(any::<bool>(), n),
            0.01..2.0f64,
        )
            .prop_filter_map("both classes", |(rows, buy, lambda)| {
                let labels: Vec<SignalClass> = buy
                    .iter()
                    .map(|&b| {
                        if b {
                            SignalClass::Buy
                        } else {
                            SignalClass::Sell
                        }
                    })
                    .collect();
                let n_buy = buy.iter().filter(|b| **b).count();
                (n_buy > 0 && n_buy < buy.len()).then_some((rows, labels, lambda))
            })
    })
}

fn c6() -> bool {
    let mut c = Criterion::new(6, "model numerics");
    let mnb = runner(50).run(&small_problem(), |(rows, labels, alpha)| {
        let m = DocTermMatrix::from_dense(&rows);
        let model = train_mnb(&m, &labels, alpha).unwrap();
        for class in &model.log_cond {
            let total: f64 = class.iter().map(|l| l.exp()).sum();
            prop_assert!((total - 1.0).abs() < 1e-9, "conditionals sum to {}", total);
        }
        let prior: f64 = model.log_prior.iter().map(|l| l.exp()).sum();
        prop_assert!((prior - 1.0).abs() < 1e-9);
        for i in 0..m.n_rows() {
            let jll = model.joint_log_likelihood(m.row(i)).unwrap();
            let top = jll[0].max(jll[1]);
            let z: f64 = jll.iter().map(|v| (v - top).exp()).sum();
            let p_sell = (jll[1] - top).exp() / z;
            let p_buy = model.predict(m.row(i)).unwrap().p_buy;
            prop_assert!(
                (p_buy + p_sell - 1.0).abs() < 1e-9,
                "posteriors {} + {}",
                p_buy,
                p_sell
            );
        }
        Ok(())
    });
    c.check(
        mnb.is_ok(),
        format!("MNB conditionals, priors and posteriors normalize: {mnb:?}"),
    );

    let worst = std::cell::Cell::new(0.0f64);
    let grad = runner(50).run(
        &(small_problem(), proptest::collection::vec(-1.5..1.5f64, 7)),
        |((rows, labels, lambda), w)| {
            let m = DocTermMatrix::from_dense(&rows);
            let params: Vec<f64> = w[..m.n_cols() + 1].to_vec();
            let (_, g) = lr_cost_gradient(&m, &labels, lambda, &params);
            let fd: Vec<f64> = (0..params.len())
                .map(|i| {
                    let h = 1e-5;
                    let mut up = params.clone();
                    let mut down = params.clone();
                    up[i] += h;
                    down[i] -= h;
                    (lr_cost_gradient(&m, &labels, lambda, &up).0
                        - lr_cost_gradient(&m, &labels, lambda, &down).0)
                        / (2.0 * h)
                })
                .collect();
            let diff: f64 = g
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let scale: f64 = g.iter().map(|a| a * a).sum::<f64>().sqrt()
                + fd.iter().map(|a| a * a).sum::<f64>().sqrt();
            let rel = diff / scale.max(1e-12);
            worst.set(worst.get().max(rel));
            prop_assert!(rel < 1e-5, "relative error {}", rel);
            Ok(())
        },
    );
    c.check(
        grad.is_ok(),
        format!(
            "LR gradient vs central differences, worst relative error {:.2e}: {grad:?}",
            worst.get()
        ),
    );

    let mono = runner(50).run(&small_problem(), |(rows, labels, lambda)| {
        let m = DocTermMatrix::from_dense(&rows);
        let fit = train_lr(
            &m,
            &labels,
            &LrParams {
                lambda,
                ..LrParams::default()
            },
        )
        .unwrap();
        for w in fit.cost_history.windows(2) {
            prop_assert!(w[1] <= w[0], "cost rose {} -> {}", w[0], w[1]);
        }
        Ok(())
    });
    c.check(
        mono.is_ok(),
        format!("LR cost non-increasing per iteration: {mono:?}"),
    );
    c.finish()
}

struct Labeled {
    corpus: SynthCorpus,
    series: PriceSeries,
    docs: Vec<LabeledDocument>,
}

fn labeled(spec: &SynthSpec) -> Labeled {
    let corpus = generate(spec).unwrap();
    let series = PriceSeries::new(corpus.bars.clone());
    let docs = label_with_context(&corpus.tweets, &spec.ticker, &series).docs;
    Labeled {
        corpus,
        series,
        docs,
    }
}

fn december() -> DateRange {
    DateRange::new(
        NaiveDate::from_ymd_opt(2016, 12, 1).unwrap(),
        NaiveDate::from_ymd_opt(2016, 12, 31).unwrap(),
    )
}

struct Outcome {
    accuracy: f64,
    tbr: Option<f64>,
    tsr: Option<f64>,
    recovery: f64,
    report: BacktestReport,
}

/// MNB + chi-squared at k = 1000, validated on an 80/20 split of the months
/// before December and backtested over December.
fn planted_run(data: &Labeled) -> Outcome {
    let period = december();
    let s = split(&data.docs, 0.8, 42, Some(period)).unwrap();
    let config = PipelineConfig {
        ranker: Ranker::ChiSquared,
        k: 1000,
        ..PipelineConfig::default()
    };
    let model = TrainedModel::fit(&config, &s.train).unwrap();
    let eval = model.evaluate(&s.validation).unwrap();

    let tokens: Vec<&[String]> = s.train.iter().map(|d| d.tokens.as_slice()).collect();
    let vocab = Vocabulary::fit(&tokens).unwrap();
    let scores = chi2_scores(&vocab.transform(&tokens), &labels_of(&s.train)).unwrap();
    let ranked: Vec<&str> = scores.ranking().iter().map(|&i| vocab.term(i)).collect();
    let recovery = recovery_score(&ranked, &data.corpus.truth.planted(), 100);

    let tweets: Vec<&Tweet> = data
        .corpus
        .tweets
        .iter()
        .filter(|t| period.contains(t.local_time().date()))
        .collect();
    let signals = signals_from_model(&tweets, &model, &data.series).unwrap();
    let report = run_backtest(
        "SYN",
        "a",
        &signals,
        &data.series,
        period,
        &BacktestConfig::default(),
    )
    .unwrap();
    Outcome {
        accuracy: eval.accuracy,
        tbr: eval.tbr,
        tsr: eval.tsr,
        recovery,
        report,
    }
}

fn c7(spec: &SynthSpec, data: &Labeled, out: &Outcome, took: Duration) -> bool {
    let mut c = Criterion::new(7, "planted-signal recovery end to end");
    c.check(
        spec.n_tweets == 20_000
            && spec.n_buy_words + spec.n_sell_words == 50
            && spec.signal_strength == 0.7
            && spec.n_noise_words == 5000,
        format!(
            "corpus: seed {}, {} tweets, {} planted words, strength {}, {} noise words, {} labeled",
            spec.seed,
            spec.n_tweets,
            spec.n_buy_words + spec.n_sell_words,
            spec.signal_strength,
            spec.n_noise_words,
            data.docs.len()
        ),
    );
    c.check(
        out.accuracy >= 0.60,
        format!(
            "MNB+CS(k=1000) validation accuracy {:.4} >= 0.60",
            out.accuracy
        ),
    );
    c.check(
        out.recovery >= 0.80,
        format!("chi2 top-100 recovery {:.2} >= 0.80", out.recovery),
    );
    let r = &out.report;
    c.check(
        r.gross_pnl.is_positive(),
        format!(
            "held-out month: {} trades, gross {} ({:.2}%)",
            r.trades.len(),
            r.gross_pnl,
            pct(r.return_rate)
        ),
    );
    c.check(
        took < Duration::from_secs(60),
        format!("runtime {took:.2?} < 60s"),
    );
    c.finish()
}

fn c8(out: &Outcome) -> bool {
    let mut c = Criterion::new(8, "zero-information control");
    c.near("validation accuracy", out.accuracy, 0.5, 0.03);
    match (out.tbr, out.tsr) {
        (Some(b), Some(s)) => c.check(
            true,
            format!("tbr {b:.4} tsr {s:.4} |gap| {:.4}", (b - s).abs()),
        ),
        _ => c.check(false, "tbr/tsr undefined"),
    }
    let b = &out.report.breakdown;
    let sig = significance(b.placed as u64, b.correct as u64, 0.5, FRAMES).unwrap();
    c.check(
        sig.frame_adjusted_survival > 0.05,
        format!(
            "backtest {}/{} correct, gross {}; survival {:.4}, frame-adjusted {:.4} > 0.05",
            b.correct, b.placed, out.report.gross_pnl, sig.survival, sig.frame_adjusted_survival
        ),
    );
    c.finish()
}

fn trade_log(r: &BacktestReport) -> Vec<u8> {
    let mut out = Vec::new();
    write_trade_log(&mut out, &r.trades).unwrap();
    out
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        files.insert(
            p.file_name().unwrap().to_string_lossy().into_owned(),
            fs::read(&p).unwrap(),
        );
    }
    files
}

fn cli(args: &[&str]) {
    let mut argv = vec!["pricesent"];
    argv.extend_from_slice(args);
    run(Cli::try_parse_from(argv).unwrap()).unwrap();
}

fn c9(reports: &[&BacktestReport], data: &Labeled) -> bool {
    let mut c = Criterion::new(9, "backtest invariants");
    for r in reports {
        let sum: Usd = r.trades.iter().map(|t| t.pnl).sum();
        let per_trade = r
            .trades
            .iter()
            .all(|t| t.pnl == trade_pnl(t.direction, t.entry, t.exit, t.shares));
        let curve = r.equity_curve.last().copied().unwrap_or(Usd::ZERO);
        c.check(
            sum == r.gross_pnl && curve == r.gross_pnl && per_trade,
            format!(
                "{} trades: pnl sum {sum} == gross {} == final equity {curve}",
                r.trades.len(),
                r.gross_pnl
            ),
        );
        let latest: Option<NaiveDateTime> = r.trades.iter().map(|t| t.latest_doc).max();
        c.check(
            look_ahead_free(r),
            format!("look-ahead guard (latest vote {latest:?})"),
        );
    }

    let period = december();
    let s = split(&data.docs, 0.8, 42, Some(period)).unwrap();
    let config = PipelineConfig {
        k: 500,
        ..PipelineConfig::default()
    };
    let tweets: Vec<&Tweet> = data
        .corpus
        .tweets
        .iter()
        .filter(|t| period.contains(t.local_time().date()))
        .collect();
    let once = || {
        let model = TrainedModel::fit(&config, &s.train).unwrap();
        let signals = signals_from_model(&tweets, &model, &data.series).unwrap();
        let r = run_backtest(
            "SYN",
            "a",
            &signals,
            &data.series,
            period,
            &BacktestConfig::default(),
        )
        .unwrap();
        (trade_log(&r), serde_json::to_vec_pretty(&r).unwrap())
    };
    let (a, b) = (once(), once());
    c.check(
        a == b,
        format!(
            "library runs byte-identical ({} + {} bytes)",
            a.0.len(),
            a.1.len()
        ),
    );

    let dir = tempfile::tempdir().unwrap();
    let syn = dir.path().join("syn");
    let out = dir.path().join("out");
    let (syn_s, out_s) = (syn.to_str().unwrap(), out.to_str().unwrap());
    cli(&[
        "synth",
        "--out-dir",
        syn_s,
        "--n-tweets",
        "3000",
        "--start",
        "2016-09-01",
        "--end",
        "2016-11-30",
        "--noise-words",
        "600",
    ]);
    let tweets_path = syn.join("tweets.jsonl");
    let bars_path = syn.join("bars.csv");
    let common = [
        "--tweets",
        tweets_path.to_str().unwrap(),
        "--bars",
        bars_path.to_str().unwrap(),
        "--out-dir",
        out_s,
        "--test-start",
        "2016-11-01",
        "--test-end",
        "2016-11-30",
        "--k",
        "300",
    ];
    let pipeline = || {
        for cmd in ["label", "train"] {
            let mut args = vec![cmd];
            args.extend_from_slice(&common);
            cli(&args);
        }
        let mut args = vec![
            "backtest",
            "--method",
            "a,c",
            "--positive",
            "",
            "--negative",
            "",
        ];
        let (pos, neg) = (syn.join("buy_words.txt"), syn.join("sell_words.txt"));
        args[4] = pos.to_str().unwrap();
        args[6] = neg.to_str().unwrap();
        args.extend_from_slice(&common);
        cli(&args);
        snapshot(&out)
    };
    let first = pipeline();
    let second = pipeline();
    let differing: Vec<&String> = first
        .keys()
        .filter(|k| first.get(*k) != second.get(*k))
        .collect();
    c.check(
        first.len() == second.len()
            && differing.is_empty()
            && first.contains_key("trades_SYN_a.csv"),
        format!(
            "CLI reruns byte-identical over {} files (differing: {differing:?})",
            first.len()
        ),
    );
    c.finish()
}

fn c10() -> bool {
    let mut c = Criterion::new(10, "tokenizer and vectorizer properties");
    let idem = runner(1000).run(&"\\PC{0,120}", |text| {
        let once = tokenize(&text);
        let twice = tokenize(&once.join(" "));
        prop_assert_eq!(once, twice);
        Ok(())
    });
    c.check(
        idem.is_ok(),
        format!("tokenizer idempotent on 1000 fuzzed strings: {idem:?}"),
    );

    let words = prop_oneof![
        Just("bull"),
        Just("bear"),
        Just("moon"),
        Just("dip"),
        Just("hold"),
        Just("$aapl"),
        Just("!!")
    ];
    let docs = proptest::collection::vec(
        proptest::collection::vec(words, 0..8).prop_map(|w| w.join(" ")),
        2..30,
    );
    let props = runner(200).run(&(docs, 1usize..30), |(texts, cut)| {
        let tokens: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t)).collect();
        let cut = cut.min(tokens.len() - 1).max(1);
        let (train, test) = tokens.split_at(cut);
        let vocab = Vocabulary::fit(train).unwrap();
        let m = vocab.transform(&tokens);
        for i in 0..m.n_rows() {
            let norm = m.word_norm(i);
            prop_assert!(
                norm.abs() < 1e-9 || (norm - 1.0).abs() < 1e-9,
                "row norm {}",
                norm
            );
        }
        for j in 0..vocab.len() {
            let df = train
                .iter()
                .filter(|d| d.iter().any(|t| t == vocab.term(j)))
                .count();
            let idf = ((1.0 + train.len() as f64) / (1.0 + df as f64)).ln() + 1.0;
            prop_assert!(
                (vocab.idf(j) - idf).abs() < 1e-12,
                "idf of {}",
                vocab.term(j)
            );
        }
        let batch = vocab.transform(test);
        for (i, doc) in test.iter().enumerate() {
            let alone = vocab.transform_one(doc);
            prop_assert_eq!(batch.row(i), alone.as_slice());
            prop_assert_eq!(batch.row(i), m.row(cut + i));
        }
        Ok(())
    });
    c.check(
        props.is_ok(),
        format!(
            "row norms in {{0,1}}, idf from training split only, transform consistent: {props:?}"
        ),
    );
    c.finish()
}

fn c11() -> bool {
    let mut c = Criterion::new(11, "sweep harness shapes");
    let small = labeled(&SynthSpec {
        n_tweets: 3000,
        start: NaiveDate::from_ymd_opt(2016, 10, 1).unwrap(),
        end: NaiveDate::from_ymd_opt(2016, 12, 31).unwrap(),
        n_noise_words: 800,
        ..SynthSpec::default()
    });
    let s = split(&small.docs, 0.8, 42, None).unwrap();
    let sweep = feature_sweep(
        &s.train,
        &s.validation,
        &PipelineConfig::default(),
        &pricesent::models::ModelKind::ALL,
        &Ranker::ALL,
        &DEFAULT_SWEEP_SIZES,
    )
    .unwrap();
    let mut csv = Vec::new();
    sweep.write_csv(&mut csv).unwrap();
    let rows = String::from_utf8(csv).unwrap().lines().count() - 1;
    c.check(
        sweep.cells.len() + sweep.skipped.len() == 80 && rows == sweep.cells.len(),
        format!(
            "feature sweep: {} cells + {} documented skips = 2 x 4 x 10 over a {}-term vocabulary; csv rows {rows}",
            sweep.cells.len(),
            sweep.skipped.len(),
            sweep.vocabulary_size
        ),
    );
    let clamped = sweep
        .cells
        .iter()
        .filter(|cell| cell.effective_size < cell.size)
        .count();
    c.check(
        sweep
            .cells
            .iter()
            .all(|cell| cell.effective_size == cell.size || cell.note.is_some()),
        format!("{clamped} cells clamped to the vocabulary, each with a note"),
    );

    let validation_start = NaiveDate::from_ymd_opt(2016, 12, 1).unwrap();
    let drifting = labeled(&SynthSpec {
        n_tweets: 13_000,
        start: NaiveDate::from_ymd_opt(2015, 12, 1).unwrap(),
        end: NaiveDate::from_ymd_opt(2016, 12, 31).unwrap(),
        n_noise_words: 1500,
        flip_date: NaiveDate::from_ymd_opt(2016, 9, 1),
        ..SynthSpec::default()
    });
    let (validation, history): (Vec<LabeledDocument>, Vec<LabeledDocument>) = drifting
        .docs
        .into_iter()
        .partition(|d| d.timestamp.date() >= validation_start);
    let config = PipelineConfig {
        k: 1000,
        ..PipelineConfig::default()
    };
    let ws = window_sweep(&history, &validation, validation_start, &config, 12).unwrap();
    let cells: Vec<String> = ws
        .cells
        .iter()
        .map(|w| {
            format!(
                "{}:{}",
                w.months,
                w.accuracy.map_or("-".into(), |a| format!("{a:.3}"))
            )
        })
        .collect();
    c.check(
        ws.cells.len() == 12,
        format!("window sweep cells {}: {}", ws.cells.len(), cells.join(" ")),
    );
    let peak = ws.peak().map(|w| w.months);
    c.check(
        peak.is_some_and(|m| m <= 3),
        format!("drifting corpus peaks at {peak:?} months (<= 3)"),
    );
    c.finish()
}

fn main() -> ExitCode {
    let mut results = vec![c1(), c2(), c3(), c4(), c5(), c6()];

    let started = Instant::now();
    let spec = SynthSpec::default();
    let planted = labeled(&spec);
    let planted_out = planted_run(&planted);
    let took = started.elapsed();
    let control = labeled(&SynthSpec {
        signal_strength: 0.5,
        ..SynthSpec::default()
    });
    let control_out = planted_run(&control);
    results.push(c7(&spec, &planted, &planted_out, took));
    results.push(c8(&control_out));
    results.push(c9(&[&planted_out.report, &control_out.report], &planted));
    results.push(c10());
    results.push(c11());

    let failed: Vec<usize> = (1..=results.len()).filter(|i| !results[i - 1]).collect();
    println!(
        "acceptance: {} of {} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {failed:?}")
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
