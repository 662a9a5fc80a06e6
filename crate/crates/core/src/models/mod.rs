//! Multinomial naive Bayes and logistic regression over sparse rows, plus
//! the accuracy / true-buy-rate / true-sell-rate report.

mod eval;
mod lr;
mod mnb;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::SignalClass;
use crate::select::WeightedTrainer;
use crate::vectorizer::DocTermMatrix;

pub use eval::{evaluate, evaluate_predictions, Confusion, EvaluationReport};
pub use lr::{lr_cost_gradient, train_lr, LrFit, LrModel, LrParams};
pub use mnb::{train_mnb, MnbModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class: SignalClass,
    pub p_buy: f64,
}

pub(crate) fn check_width(row: &[(u32, f64)], n_features: usize) -> Result<()> {
    match row.last() {
        Some(&(c, _)) if c as usize >= n_features => Err(Error::DimensionMismatch {
            expected: n_features,
            actual: c as usize + 1,
        }),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mnb,
    Lr,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Mnb, ModelKind::Lr];

    pub fn code(self) -> &'static str {
        match self {
            ModelKind::Mnb => "MNB",
            ModelKind::Lr => "LR",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mnb" | "nb" => Ok(ModelKind::Mnb),
            "lr" | "logistic" => Ok(ModelKind::Lr),
            other => Err(Error::Config(format!(
                "unknown model `{other}` (expected mnb or lr)"
            ))),
        }
    }
}

/// Model family with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub alpha: f64,
    pub lr: LrParams,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            kind: ModelKind::Mnb,
            alpha: 1.0,
            lr: LrParams::default(),
        }
    }
}

impl ModelParams {
    pub fn with_kind(self, kind: ModelKind) -> Self {
        ModelParams { kind, ..self }
    }

    pub fn train(&self, m: &DocTermMatrix, labels: &[SignalClass]) -> Result<Classifier> {
        match self.kind {
            ModelKind::Mnb => Ok(Classifier::Mnb(train_mnb(m, labels, self.alpha)?)),
            ModelKind::Lr => Ok(Classifier::Lr(train_lr(m, labels, &self.lr)?.model)),
        }
    }
}

impl WeightedTrainer for ModelParams {
    fn name(&self) -> String {
        self.kind.to_string()
    }

    fn feature_weights(
        &self,
        m: &DocTermMatrix,
        labels: &[SignalClass],
    ) -> Result<Option<Vec<f64>>> {
        Ok(Some(self.train(m, labels)?.feature_weights()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Classifier {
    Mnb(MnbModel),
    Lr(LrModel),
}

impl Classifier {
    pub fn kind(&self) -> ModelKind {
        match self {
            Classifier::Mnb(_) => ModelKind::Mnb,
            Classifier::Lr(_) => ModelKind::Lr,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Classifier::Mnb(m) => m.n_features(),
            Classifier::Lr(m) => m.n_features(),
        }
    }

    pub fn predict(&self, row: &[(u32, f64)]) -> Result<Prediction> {
        match self {
            Classifier::Mnb(m) => m.predict(row),
            Classifier::Lr(m) => m.predict(row),
        }
    }

    pub fn predict_all(&self, m: &DocTermMatrix) -> Result<Vec<Prediction>> {
        if m.n_cols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: m.n_cols(),
            });
        }
        (0..m.n_rows())
            .into_par_iter()
            .map(|i| self.predict(m.row(i)))
            .collect()
    }

    /// Importance magnitude per feature, used for elimination.
    pub fn feature_weights(&self) -> Vec<f64> {
        match self {
            Classifier::Mnb(m) => m.feature_weights(),
            Classifier::Lr(m) => m.feature_weights(),
        }
    }

    /// Signed per-feature evidence for (Buy, Sell): log conditionals for
    /// naive Bayes, `(+w, -w)` for logistic regression.
    pub fn class_weights(&self, feature: usize) -> (f64, f64) {
        match self {
            Classifier::Mnb(m) => (m.log_cond[0][feature], m.log_cond[1][feature]),
            Classifier::Lr(m) => (m.weights[feature], -m.weights[feature]),
        }
    }
}
