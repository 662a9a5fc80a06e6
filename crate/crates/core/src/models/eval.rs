use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::SignalClass;
use crate::vectorizer::DocTermMatrix;

use super::Classifier;

/// Counts indexed as `truth_as_predicted`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub buy_as_buy: usize,
    pub buy_as_sell: usize,
    pub sell_as_buy: usize,
    pub sell_as_sell: usize,
}

/// Rates for an absent class are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n: usize,
    pub n_buy: usize,
    pub n_sell: usize,
    pub accuracy: f64,
    pub tbr: Option<f64>,
    pub tsr: Option<f64>,
    pub tbr_tsr_gap: Option<f64>,
    pub confusion: Confusion,
}

pub fn evaluate_predictions(
    predicted: &[SignalClass],
    truth: &[SignalClass],
) -> Result<EvaluationReport> {
    if predicted.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let mut c = Confusion::default();
    for (p, t) in predicted.iter().zip(truth) {
        match (t, p) {
            (SignalClass::Buy, SignalClass::Buy) => c.buy_as_buy += 1,
            (SignalClass::Buy, SignalClass::Sell) => c.buy_as_sell += 1,
            (SignalClass::Sell, SignalClass::Buy) => c.sell_as_buy += 1,
            (SignalClass::Sell, SignalClass::Sell) => c.sell_as_sell += 1,
        }
    }
    let n_buy = c.buy_as_buy + c.buy_as_sell;
    let n_sell = c.sell_as_buy + c.sell_as_sell;
    let rate = |hit: usize, of: usize| (of > 0).then(|| hit as f64 / of as f64);
    let tbr = rate(c.buy_as_buy, n_buy);
    let tsr = rate(c.sell_as_sell, n_sell);
    Ok(EvaluationReport {
        n: truth.len(),
        n_buy,
        n_sell,
        accuracy: (c.buy_as_buy + c.sell_as_sell) as f64 / truth.len() as f64,
        tbr,
        tsr,
        tbr_tsr_gap: tbr.zip(tsr).map(|(b, s)| (b - s).abs()),
        confusion: c,
    })
}

pub fn evaluate(
    model: &Classifier,
    m: &DocTermMatrix,
    labels: &[SignalClass],
) -> Result<EvaluationReport> {
    let predicted: Vec<SignalClass> = model.predict_all(m)?.into_iter().map(|p| p.class).collect();
    evaluate_predictions(&predicted, labels)
}
