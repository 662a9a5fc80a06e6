//! Generate a small synthetic corpus and write it to a temporary directory.

use chrono::NaiveDate;
use pricesent::synth::{generate, SynthSpec};

fn main() -> pricesent::Result<()> {
    let spec = SynthSpec {
        n_tweets: 2000,
        start: NaiveDate::from_ymd_opt(2016, 2, 1).unwrap(),
        end: NaiveDate::from_ymd_opt(2016, 2, 29).unwrap(),
        n_noise_words: 300,
        signal_strength: 0.8,
        ..SynthSpec::default()
    };
    let corpus = generate(&spec)?;
    println!(
        "{} tweets, {} bars, empirical strength {:.3}",
        corpus.tweets.len(),
        corpus.bars.len(),
        corpus.empirical_strength()
    );
    println!("buy words:  {}", corpus.truth.buy_words[..5].join(" "));
    println!("sell words: {}", corpus.truth.sell_words[..5].join(" "));
    for t in corpus.tweets.iter().take(3) {
        println!("{} {} {}", t.id, t.timestamp, t.text);
    }

    let dir = std::env::temp_dir().join("pricesent_synth_example");
    corpus.write_to(&dir, Some("# example corpus"))?;
    println!("written to {}", dir.display());
    Ok(())
}
