//! Rank words with the four selectors on a synthetic corpus and check how
//! many of the planted signal words come out on top.

use chrono::NaiveDate;
use pricesent::labeler::{label_with_context, PriceSeries};
use pricesent::models::ModelParams;
use pricesent::pipeline::{labels_of, rank_features};
use pricesent::select::Ranker;
use pricesent::synth::{generate, recovery_score, SynthSpec};
use pricesent::vectorizer::Vocabulary;

fn main() -> pricesent::Result<()> {
    let spec = SynthSpec {
        n_tweets: 4000,
        start: NaiveDate::from_ymd_opt(2016, 1, 1).unwrap(),
        end: NaiveDate::from_ymd_opt(2016, 3, 31).unwrap(),
        n_noise_words: 800,
        ..SynthSpec::default()
    };
    let corpus = generate(&spec)?;
    let series = PriceSeries::new(corpus.bars.clone());
    let docs = label_with_context(&corpus.tweets, &spec.ticker, &series).docs;
    let tokens: Vec<&[String]> = docs.iter().map(|d| d.tokens.as_slice()).collect();
    let vocab = Vocabulary::fit(&tokens)?;
    let x = vocab.transform(&tokens);
    let labels = labels_of(&docs);
    let planted = corpus.truth.planted();
    println!(
        "{} documents, {} terms, {} planted words",
        docs.len(),
        vocab.len(),
        planted.len()
    );

    for ranker in Ranker::ALL {
        let scores = rank_features(ranker, &ModelParams::default(), &x, &labels, planted.len())?;
        let ranked: Vec<&str> = scores.ranking().iter().map(|&i| vocab.term(i)).collect();
        println!(
            "{ranker:<4} recovery@{} = {:.2}  top: {}",
            planted.len(),
            recovery_score(&ranked, &planted, planted.len()),
            ranked[..6].join(" ")
        );
    }
    Ok(())
}
