//! Parse a handful of tweets and minute bars, drop spam and label each tweet
//! by where the price is an hour later.

use pricesent::ingest::{
    parse_bars, parse_tweets, select_for_stock, spam_filter, DEFAULT_MAX_CASHTAGS,
};
use pricesent::labeler::{label_with_context, PriceSeries};

const TWEETS: &str = r#"
{"id":"1","timestamp":"2017-01-04T16:05:00Z","text":"$AAPL looking strong into the afternoon"}
{"id":"2","timestamp":"2017-01-04T16:40:00Z","text":"$AAPL $MSFT $GOOG $AMZN top picks"}
{"id":"3","timestamp":"2017-01-04T14:45:00Z","text":"$AAPL before the open hour is done"}
{"id":"4","timestamp":"2017-01-04T17:10:00Z","text":"selling $AAPL here https://t.co/x"}
not json
"#;

fn bars() -> String {
    // 2017-01-04 09:30..16:00 Eastern; price drifts up until 12:30, then down.
    let mut csv = String::from("date,time,open,high,low,close,volume\n");
    for m in 0..390 {
        let minute = 9 * 60 + 30 + m;
        let cents = if m < 180 {
            11_600 + m
        } else {
            11_600 + 360 - m
        };
        let px = format!("{}.{:02}", cents / 100, cents % 100);
        csv.push_str(&format!(
            "2017-01-04,{:02}:{:02},{px},{px},{px},{px},{}\n",
            minute / 60,
            minute % 60,
            1000 + m
        ));
    }
    csv
}

fn main() -> pricesent::Result<()> {
    let parsed = parse_tweets(TWEETS.as_bytes())?;
    for e in &parsed.errors {
        println!("line {} skipped: {}", e.line, e.message);
    }
    let spam = spam_filter(parsed.tweets, DEFAULT_MAX_CASHTAGS);
    println!("{} tweets, {} removed as spam", spam.total, spam.removed);

    let series = PriceSeries::new(parse_bars(bars().as_bytes())?);
    let aapl = select_for_stock(&spam.kept, "AAPL");
    let out = label_with_context(aapl.iter().copied(), "AAPL", &series);
    for d in &out.docs {
        println!(
            "{} {} {} -> {} ({} -> {}), trend {} volume {}",
            d.tweet_id,
            d.timestamp,
            d.tokens.join(" "),
            d.label,
            d.price_at,
            d.price_after,
            d.prior_trend,
            d.hour_volume
        );
    }
    for (reason, n) in &out.skipped {
        println!("skipped {n}: {reason}");
    }
    Ok(())
}
