//! Everything in one go: synthesize, label, sweep feature counts, train the
//! best cell, backtest on the held-out month and test the hit rate.

use chrono::NaiveDate;
use pricesent::backtest::{run_backtest, signals_from_model, BacktestConfig};
use pricesent::ingest::Tweet;
use pricesent::labeler::{label_with_context, split, DateRange, PriceSeries};
use pricesent::models::{ModelKind, ModelParams};
use pricesent::pipeline::{PipelineConfig, TrainedModel};
use pricesent::select::Ranker;
use pricesent::stats::{benchmark_buy_and_hold, sharpe, significance};
use pricesent::sweep::feature_sweep;
use pricesent::synth::{benchmark_bars, generate, SynthSpec};

fn main() -> pricesent::Result<()> {
    let spec = SynthSpec {
        n_tweets: 8000,
        start: NaiveDate::from_ymd_opt(2016, 1, 1).unwrap(),
        end: NaiveDate::from_ymd_opt(2016, 4, 30).unwrap(),
        n_noise_words: 1500,
        ..SynthSpec::default()
    };
    let corpus = generate(&spec)?;
    let series = PriceSeries::new(corpus.bars.clone());
    let test = DateRange::new(NaiveDate::from_ymd_opt(2016, 4, 1).unwrap(), spec.end);
    let labeled = label_with_context(&corpus.tweets, &spec.ticker, &series);
    println!(
        "labeled {} documents, skipped {:?}",
        labeled.docs.len(),
        labeled.skipped
    );
    let data = split(&labeled.docs, 0.8, 42, Some(test))?;

    let sweep = feature_sweep(
        &data.train,
        &data.validation,
        &PipelineConfig::default(),
        &ModelKind::ALL,
        &[Ranker::ChiSquared, Ranker::MutualInfo],
        &[250, 500, 1000],
    )?;
    let best = sweep.best().expect("sweep produced cells");
    println!(
        "best cell: {} {} {} accuracy {:.4}",
        best.model, best.ranker, best.size, best.accuracy
    );

    let config = PipelineConfig {
        model: ModelParams::default().with_kind(best.model),
        ranker: best.ranker,
        k: best.size,
        ..PipelineConfig::default()
    };
    let mut train = data.train.clone();
    train.extend(data.validation.iter().cloned());
    let model = TrainedModel::fit(&config, &train)?;
    println!("test accuracy {:.4}", model.evaluate(&data.test)?.accuracy);

    let tweets: Vec<&Tweet> = corpus
        .tweets
        .iter()
        .filter(|t| test.contains(t.local_time().date()))
        .collect();
    let signals = signals_from_model(&tweets, &model, &series)?;
    let report = run_backtest(
        &spec.ticker,
        "model",
        &signals,
        &series,
        test,
        &BacktestConfig::default(),
    )?;
    let b = &report.breakdown;
    println!(
        "backtest: {} trades, {} correct, gross {} ({:.2}%), net {:.2}%",
        b.placed,
        b.correct,
        report.gross_pnl,
        100.0 * report.return_rate,
        100.0 * report.net_return_rate
    );
    let sig = significance(b.placed as u64, b.correct as u64, 0.5, 1.0)?;
    println!(
        "P(X >= {} of {}) = {:.3e}",
        b.correct, b.placed, sig.survival
    );

    let bench = PriceSeries::new(benchmark_bars(
        spec.seed + 1,
        test.start,
        test.end,
        spec.volatility,
    )?);
    let bench_returns = benchmark_buy_and_hold(&bench, test)?;
    let strategy: Vec<f64> = bench_returns
        .iter()
        .map(|(d, _)| {
            report
                .daily_returns
                .iter()
                .find(|(sd, _)| sd == d)
                .map_or(0.0, |x| x.1)
        })
        .collect();
    let bench_only: Vec<f64> = bench_returns.iter().map(|x| x.1).collect();
    println!(
        "daily sharpe vs benchmark {:.3}",
        sharpe(&strategy, &bench_only)?
    );
    Ok(())
}
