//! Chance of doing at least this well by coin flipping.

use pricesent::stats::{binom_pmf, binom_survival, significance};

fn main() -> pricesent::Result<()> {
    println!("P(X = 5 | 10, 0.5)   = {:.6}", binom_pmf(10, 5, 0.5)?);
    println!("P(X >= 8 | 10, 0.5)  = {:.6}", binom_survival(10, 8, 0.5)?);

    // 253 of 468 hourly trades correct, one time frame and then twelve.
    for frames in [1.0, 12.0] {
        let r = significance(468, 253, 0.5, frames)?;
        println!(
            "frames {frames:>4}: P(X >= 253) = {:.4}  adjusted {:.4}  (independent periods {:.4})",
            r.survival, r.frame_adjusted_survival, r.independent_periods_variant.survival
        );
    }
    Ok(())
}
