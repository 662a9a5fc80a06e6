//! Accuracy against training-window length when the word-to-move mapping
//! flips partway through the history.

use chrono::NaiveDate;
use pricesent::labeler::{label_with_context, LabeledDocument, PriceSeries};
use pricesent::pipeline::PipelineConfig;
use pricesent::sweep::window_sweep;
use pricesent::synth::{generate, SynthSpec};

fn main() -> pricesent::Result<()> {
    let validation_start = NaiveDate::from_ymd_opt(2016, 9, 1).unwrap();
    let spec = SynthSpec {
        n_tweets: 10_000,
        start: NaiveDate::from_ymd_opt(2016, 1, 1).unwrap(),
        end: NaiveDate::from_ymd_opt(2016, 9, 30).unwrap(),
        n_noise_words: 1500,
        flip_date: NaiveDate::from_ymd_opt(2016, 6, 1),
        ..SynthSpec::default()
    };
    let corpus = generate(&spec)?;
    let series = PriceSeries::new(corpus.bars.clone());
    let docs = label_with_context(&corpus.tweets, &spec.ticker, &series).docs;
    let (validation, history): (Vec<LabeledDocument>, Vec<LabeledDocument>) = docs
        .into_iter()
        .partition(|d| d.timestamp.date() >= validation_start);

    let config = PipelineConfig {
        k: 1000,
        ..PipelineConfig::default()
    };
    let sweep = window_sweep(&history, &validation, validation_start, &config, 8)?;
    for c in &sweep.cells {
        match c.accuracy {
            Some(a) => println!(
                "{:>2} months  n_train {:>5}  accuracy {a:.4}",
                c.months, c.n_train
            ),
            None => println!("{:>2} months  missing", c.months),
        }
    }
    println!("peak: {:?} months", sweep.peak().map(|c| c.months));
    Ok(())
}
