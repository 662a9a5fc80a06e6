//! Tokenize tweets and build the TF-IDF matrix with stock features appended.

use pricesent::labeler::StockContext;
use pricesent::tokenizer::tokenize;
use pricesent::vectorizer::{StockFeature, Vocabulary};

fn main() -> pricesent::Result<()> {
    let texts = [
        "$TSLA is sooooo BULLISH!!! https://t.co/abc 250 target",
        "Dumping $TSLA, bearish bearish",
        "$tsla flat today... <b>meh</b>",
    ];
    let docs: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t)).collect();
    for (t, d) in texts.iter().zip(&docs) {
        println!("{t:<55} => {d:?}");
    }

    let vocab = Vocabulary::fit(&docs)?;
    println!("\nvocabulary ({} terms):", vocab.len());
    for i in 0..vocab.len() {
        println!(
            "  {:<10} df={} idf={:.4}",
            vocab.term(i),
            vocab.doc_freq(i),
            vocab.idf(i)
        );
    }

    let m = vocab.transform(&docs);
    let contexts = [
        StockContext {
            prior_trend: 1,
            hour_volume: 5000,
            weekday: 0,
            ..StockContext::default()
        },
        StockContext {
            prior_trend: 0,
            hour_volume: 1000,
            weekday: 2,
            ..StockContext::default()
        },
        StockContext {
            prior_trend: 1,
            hour_volume: 3000,
            weekday: 4,
            ..StockContext::default()
        },
    ];
    let full = m.append_stock_features(&contexts, &StockFeature::ALL, 3000.0)?;
    println!(
        "\n{} rows x {} columns ({} word columns)",
        full.n_rows(),
        full.n_cols(),
        full.word_cols()
    );
    for i in 0..full.n_rows() {
        let row: Vec<String> = full
            .dense_row(i)
            .iter()
            .map(|v| format!("{v:.3}"))
            .collect();
        println!("  word norm {:.3}: [{}]", full.word_norm(i), row.join(" "));
    }
    Ok(())
}
