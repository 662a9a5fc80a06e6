use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::SignalClass;
use crate::select::class_sizes;
use crate::vectorizer::DocTermMatrix;

use super::{check_width, Prediction};

/// Multinomial naive Bayes over non-negative feature weights. Index 0 of
/// each pair is Buy, index 1 is Sell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnbModel {
    pub alpha: f64,
    pub log_prior: [f64; 2],
    pub log_cond: [Vec<f64>; 2],
}

pub fn train_mnb(m: &DocTermMatrix, labels: &[SignalClass], alpha: f64) -> Result<MnbModel> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "smoothing alpha {alpha} must be > 0"
        )));
    }
    if m.n_rows() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels for {} matrix rows",
            labels.len(),
            m.n_rows()
        )));
    }
    let (n_buy, n_sell) = class_sizes(labels)?;
    let v = m.n_cols();
    if v == 0 {
        return Err(Error::Empty("feature matrix has no columns"));
    }
    let mut mass = [vec![0.0f64; v], vec![0.0f64; v]];
    for (row, label) in m.rows().zip(labels) {
        let g = usize::from(!label.is_buy());
        for &(c, w) in row {
            if w < 0.0 || !w.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "feature weight {w} in column {c}; naive Bayes needs finite non-negative weights"
                )));
            }
            mass[g][c as usize] += w;
        }
    }
    let total = n_buy as f64 + n_sell as f64;
    let log_cond = mass.map(|counts| {
        let denom = alpha * v as f64 + counts.iter().sum::<f64>();
        counts
            .iter()
            .map(|w| ((alpha + w) / denom).ln())
            .collect::<Vec<_>>()
    });
    Ok(MnbModel {
        alpha,
        log_prior: [(n_buy as f64 / total).ln(), (n_sell as f64 / total).ln()],
        log_cond,
    })
}

impl MnbModel {
    pub fn n_features(&self) -> usize {
        self.log_cond[0].len()
    }

    /// Joint log-likelihoods (Buy, Sell) of a row.
    pub fn joint_log_likelihood(&self, row: &[(u32, f64)]) -> Result<[f64; 2]> {
        check_width(row, self.n_features())?;
        let mut out = self.log_prior;
        for &(c, w) in row {
            out[0] += w * self.log_cond[0][c as usize];
            out[1] += w * self.log_cond[1][c as usize];
        }
        Ok(out)
    }

    pub fn predict(&self, row: &[(u32, f64)]) -> Result<Prediction> {
        let [buy, sell] = self.joint_log_likelihood(row)?;
        let peak = buy.max(sell);
        let (eb, es) = ((buy - peak).exp(), (sell - peak).exp());
        let p_buy = eb / (eb + es);
        let class = if buy > sell {
            SignalClass::Buy
        } else {
            SignalClass::Sell
        };
        Ok(Prediction { class, p_buy })
    }

    /// |log P(t|Buy) - log P(t|Sell)| per feature.
    pub fn feature_weights(&self) -> Vec<f64> {
        self.log_cond[0]
            .iter()
            .zip(&self.log_cond[1])
            .map(|(b, s)| (b - s).abs())
            .collect()
    }
}
