//! Classify tweets with a scored lexicon and with positive/negative word
//! lists, and show how skewed the two are.

use pricesent::lexicon::{load_scored, load_wordlists, skew_report};
use pricesent::tokenizer::tokenize;

const SCORED: &str = "# term<TAB>score\nbullish\t0.8\nbuy\t0.5\nmoon\t0.6\nbearish\t-0.7\nsell\t-0.4\ncrash\t-0.9\nbuy\t0.6\n";
const POSITIVE: &str = "gain\nstrong\nbeat\n";
const NEGATIVE: &str = "loss\nweak\nmiss\ncrash\n";

fn main() -> pricesent::Result<()> {
    let scored = load_scored(SCORED.as_bytes(), "scored")?;
    for w in &scored.warnings {
        println!("warning: {w}");
    }
    let lists = load_wordlists(POSITIVE.as_bytes(), NEGATIVE.as_bytes(), "lists")?.lexicon;
    let scored = scored.lexicon;

    let tweets = [
        "$FB bullish, buy before earnings",
        "$FB strong quarter, big beat",
        "$FB is going to crash, sell",
        "$FB weak guidance but bullish long term",
        "$FB lunch",
    ];
    let mut a = Vec::new();
    let mut b = Vec::new();
    for t in tweets {
        let tokens = tokenize(t);
        let (sa, sb) = (scored.classify(&tokens), lists.classify(&tokens));
        println!("{t:<45} scored: {:<6} lists: {}", fmt(sa), fmt(sb));
        a.push(sa);
        b.push(sb);
    }
    println!("\nscored lexicon: {:?}", skew_report(&a)?);
    println!("word lists:     {:?}", skew_report(&b)?);
    Ok(())
}

fn fmt(c: Option<pricesent::labeler::SignalClass>) -> String {
    c.map_or("-".into(), |c| c.to_string())
}
