//! Sharpe ratio of a strategy's daily returns over a buy-and-hold benchmark.

use chrono::NaiveDate;
use pricesent::labeler::{DateRange, PriceSeries};
use pricesent::stats::{benchmark_buy_and_hold, sharpe};
use pricesent::synth::benchmark_bars;

fn main() -> pricesent::Result<()> {
    let strategy = [0.004, -0.001, 0.003, 0.002, -0.002, 0.005];
    let bench = [0.001, 0.000, 0.002, -0.001, 0.001, 0.002];
    println!("sharpe = {:.4}", sharpe(&strategy, &bench)?);

    match sharpe(&[0.01, 0.02], &[0.0, 0.01]) {
        Err(e) => println!("constant differential: {e}"),
        Ok(s) => println!("unexpected {s}"),
    }

    let start = NaiveDate::from_ymd_opt(2016, 3, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(2016, 3, 31).unwrap();
    let series = PriceSeries::new(benchmark_bars(1, start, end, 0.004)?);
    let daily = benchmark_buy_and_hold(&series, DateRange::new(start, end))?;
    for (d, r) in daily.iter().take(5) {
        println!("{d} {:+.4}%", 100.0 * r);
    }
    Ok(())
}
