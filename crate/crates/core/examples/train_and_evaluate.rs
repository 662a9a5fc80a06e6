//! Train both classifiers on a synthetic corpus, report validation
//! accuracy and per-class rates, and round-trip a model through JSON.

use chrono::NaiveDate;
use pricesent::labeler::{label_with_context, split, PriceSeries};
use pricesent::models::{ModelKind, ModelParams};
use pricesent::pipeline::{PipelineConfig, TrainedModel};
use pricesent::select::Ranker;
use pricesent::synth::{generate, SynthSpec};

fn main() -> pricesent::Result<()> {
    let spec = SynthSpec {
        n_tweets: 6000,
        start: NaiveDate::from_ymd_opt(2016, 1, 1).unwrap(),
        end: NaiveDate::from_ymd_opt(2016, 4, 30).unwrap(),
        n_noise_words: 1500,
        ..SynthSpec::default()
    };
    let corpus = generate(&spec)?;
    let series = PriceSeries::new(corpus.bars.clone());
    let docs = label_with_context(&corpus.tweets, &spec.ticker, &series).docs;
    let data = split(&docs, 0.8, 42, None)?;

    for kind in ModelKind::ALL {
        let config = PipelineConfig {
            model: ModelParams::default().with_kind(kind),
            ranker: Ranker::ChiSquared,
            k: 1000,
            ..PipelineConfig::default()
        };
        let model = TrainedModel::fit(&config, &data.train)?;
        let r = model.evaluate(&data.validation)?;
        println!(
            "{kind}: accuracy {:.4}  tbr {:.4}  tsr {:.4}  confusion {:?}",
            r.accuracy,
            r.tbr.unwrap_or(f64::NAN),
            r.tsr.unwrap_or(f64::NAN),
            r.confusion
        );
        for e in model.dictionary().iter().take(5) {
            println!("    {:>3} {:<12} {:.3}", e.rank, e.term, e.score);
        }

        let path = std::env::temp_dir().join(format!("pricesent_example_{}.json", kind.code()));
        model.save(&path)?;
        let back = TrainedModel::load(&path)?;
        assert_eq!(back.evaluate(&data.validation)?, r);
        std::fs::remove_file(&path)?;
    }
    Ok(())
}
