//! Hourly backtest of a trained model against the planted-word lists on one
//! month of synthetic data.

use chrono::NaiveDate;
use pricesent::backtest::{
    run_backtest, signals_from_lexicon, signals_from_model, write_trade_log, BacktestConfig,
};
use pricesent::ingest::Tweet;
use pricesent::labeler::{label_with_context, split, DateRange, PriceSeries};
use pricesent::lexicon::{Lexicon, LexiconKind};
use pricesent::pipeline::{PipelineConfig, TrainedModel};
use pricesent::synth::{generate, SynthSpec};

fn main() -> pricesent::Result<()> {
    let spec = SynthSpec {
        n_tweets: 8000,
        start: NaiveDate::from_ymd_opt(2016, 1, 1).unwrap(),
        end: NaiveDate::from_ymd_opt(2016, 5, 31).unwrap(),
        n_noise_words: 1500,
        ..SynthSpec::default()
    };
    let corpus = generate(&spec)?;
    let series = PriceSeries::new(corpus.bars.clone());
    let period = DateRange::new(NaiveDate::from_ymd_opt(2016, 5, 1).unwrap(), spec.end);
    let docs = label_with_context(&corpus.tweets, &spec.ticker, &series).docs;
    let data = split(&docs, 1.0, 42, Some(period))?;
    let model = TrainedModel::fit(
        &PipelineConfig {
            k: 1000,
            ..PipelineConfig::default()
        },
        &data.train,
    )?;

    let tweets: Vec<&Tweet> = corpus
        .tweets
        .iter()
        .filter(|t| period.contains(t.local_time().date()))
        .collect();
    let planted = corpus
        .truth
        .buy_words
        .iter()
        .map(|w| (w.clone(), 1.0))
        .chain(corpus.truth.sell_words.iter().map(|w| (w.clone(), -1.0)));
    let lexicon = Lexicon::from_scores("planted", LexiconKind::Wordlists, planted);

    let config = BacktestConfig::default();
    for (name, signals) in [
        ("model", signals_from_model(&tweets, &model, &series)?),
        ("planted words", signals_from_lexicon(&tweets, &lexicon)),
    ] {
        let r = run_backtest(&spec.ticker, name, &signals, &series, period, &config)?;
        println!(
            "{name:<14} trades {:>3}  correct {:.1}%  gross {}  on {}  return {:.2}%  net {:.2}%",
            r.trades.len(),
            r.breakdown.correct_pct.unwrap_or(0.0),
            r.gross_pnl,
            r.account.size,
            100.0 * r.return_rate,
            100.0 * r.net_return_rate
        );
        if name == "model" {
            let mut out = Vec::new();
            write_trade_log(&mut out, &r.trades[..r.trades.len().min(4)])?;
            print!("{}", String::from_utf8_lossy(&out));
        }
    }
    Ok(())
}
