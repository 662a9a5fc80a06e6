//! Fitted text-to-signal model: vocabulary, selected word columns, appended
//! stock features and a classifier, persisted as versioned JSON.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::{mean_hour_volume, LabeledDocument, SignalClass, StockContext};
use crate::models::{evaluate_predictions, Classifier, EvaluationReport, ModelParams, Prediction};
use crate::select::{self, Ranker, RankerScores, RFE_STEP_FRACTION};
use crate::vectorizer::{DocTermMatrix, StockFeature, Vocabulary};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub model: ModelParams,
    pub ranker: Ranker,
    pub k: usize,
    pub stock_features: Vec<StockFeature>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            model: ModelParams::default(),
            ranker: Ranker::ChiSquared,
            k: 5000,
            stock_features: StockFeature::ALL.to_vec(),
        }
    }
}

/// Scores every column of `m`. Elimination prunes down to `target_k`.
pub fn rank_features(
    ranker: Ranker,
    model: &ModelParams,
    m: &DocTermMatrix,
    labels: &[SignalClass],
    target_k: usize,
) -> Result<RankerScores> {
    match ranker {
        Ranker::ChiSquared => select::chi2_scores(m, labels),
        Ranker::FValue => select::f_scores(m, labels),
        Ranker::MutualInfo => select::mi_scores(m, labels),
        Ranker::Recursive => select::rfe(model, m, labels, target_k.max(1), RFE_STEP_FRACTION),
    }
}

pub fn labels_of(docs: &[LabeledDocument]) -> Vec<SignalClass> {
    docs.iter().map(|d| d.label).collect()
}

pub fn contexts_of(docs: &[LabeledDocument]) -> Vec<StockContext> {
    docs.iter().map(LabeledDocument::context).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub config: PipelineConfig,
    pub vocabulary: Vocabulary,
    /// Vocabulary index of each selected word column, best first.
    pub selected: Vec<usize>,
    pub selected_scores: Vec<f64>,
    pub mean_hour_volume: f64,
    pub classifier: Classifier,
    pub n_train: usize,
    /// Set when the requested subset size exceeded the vocabulary.
    pub note: Option<String>,
}

impl TrainedModel {
    pub fn fit(config: &PipelineConfig, train: &[LabeledDocument]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty("training set"));
        }
        let tokens: Vec<&[String]> = train.iter().map(|d| d.tokens.as_slice()).collect();
        let vocabulary = Vocabulary::fit(&tokens)?;
        let x = vocabulary.transform(&tokens);
        let labels = labels_of(train);
        Self::fit_matrix(config, vocabulary, &x, train, &labels, None)
    }

    /// Fits on an already vectorised training set, reusing `scores` when the
    /// caller has ranked the columns before.
    pub fn fit_matrix(
        config: &PipelineConfig,
        vocabulary: Vocabulary,
        x: &DocTermMatrix,
        train: &[LabeledDocument],
        labels: &[SignalClass],
        scores: Option<&RankerScores>,
    ) -> Result<Self> {
        if config.k == 0 {
            return Err(Error::Config(
                "feature subset size k must be at least 1".into(),
            ));
        }
        let n_words = vocabulary.len();
        let k = config.k.min(n_words);
        let note = (k < config.k)
            .then(|| format!("k = {} clamped to vocabulary size {n_words}", config.k));
        let owned;
        let scores = match scores {
            Some(s) => s,
            None => {
                owned = rank_features(config.ranker, &config.model, x, labels, k)?;
                &owned
            }
        };
        let (reduced, selected) = select::top_k(x, scores, k)?;
        let mean = mean_hour_volume(train);
        let features =
            reduced.append_stock_features(&contexts_of(train), &config.stock_features, mean)?;
        let classifier = config.model.train(&features, labels)?;
        Ok(TrainedModel {
            format_version: MODEL_FORMAT_VERSION,
            config: config.clone(),
            selected_scores: selected.iter().map(|&i| scores.scores[i]).collect(),
            selected,
            vocabulary,
            mean_hour_volume: mean,
            classifier,
            n_train: train.len(),
            note,
        })
    }

    pub fn features<S: AsRef<str>, D: AsRef<[S]>>(
        &self,
        tokens: &[D],
        contexts: &[StockContext],
    ) -> Result<DocTermMatrix> {
        self.vocabulary
            .transform(tokens)
            .select_columns(&self.selected)
            .append_stock_features(contexts, &self.config.stock_features, self.mean_hour_volume)
    }

    pub fn predict_tokens<S: AsRef<str>, D: AsRef<[S]>>(
        &self,
        tokens: &[D],
        contexts: &[StockContext],
    ) -> Result<Vec<Prediction>> {
        self.classifier
            .predict_all(&self.features(tokens, contexts)?)
    }

    pub fn predict_docs(&self, docs: &[LabeledDocument]) -> Result<Vec<Prediction>> {
        let tokens: Vec<&[String]> = docs.iter().map(|d| d.tokens.as_slice()).collect();
        self.predict_tokens(&tokens, &contexts_of(docs))
    }

    pub fn evaluate(&self, docs: &[LabeledDocument]) -> Result<EvaluationReport> {
        let predicted: Vec<SignalClass> = self
            .predict_docs(docs)?
            .into_iter()
            .map(|p| p.class)
            .collect();
        evaluate_predictions(&predicted, &labels_of(docs))
    }

    /// Selected words in rank order with their per-class evidence.
    pub fn dictionary(&self) -> Vec<DictionaryEntry> {
        self.selected
            .iter()
            .enumerate()
            .map(|(col, &vocab_idx)| {
                let (buy_weight, sell_weight) = self.classifier.class_weights(col);
                DictionaryEntry {
                    rank: col + 1,
                    term: self.vocabulary.term(vocab_idx).to_string(),
                    score: self.selected_scores[col],
                    buy_weight,
                    sell_weight,
                }
            })
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut model: TrainedModel = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "model file version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        model.vocabulary.rebuild_index();
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DictionaryEntry {
    pub rank: usize,
    pub term: String,
    pub score: f64,
    pub buy_weight: f64,
    pub sell_weight: f64,
}

/// `rank,term,score,buy_weight,sell_weight`
pub fn write_dictionary_csv<W: Write>(sink: W, entries: &[DictionaryEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for e in entries {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeler::tests::doc_with_context;
    use crate::models::ModelKind;

    fn doc(tokens: &[&str], label: SignalClass) -> LabeledDocument {
        let mut d = doc_with_context(0, 100, 0, 1);
        d.tokens = tokens.iter().map(|s| s.to_string()).collect();
        d.label = label;
        d
    }

    fn corpus() -> Vec<LabeledDocument> {
        use SignalClass::{Buy, Sell};
        vec![
            doc(&["moon", "calls"], Buy),
            doc(&["moon", "rally"], Buy),
            doc(&["calls", "rally", "the"], Buy),
            doc(&["dump", "puts"], Sell),
            doc(&["dump", "crash", "the"], Sell),
            doc(&["puts", "crash"], Sell),
        ]
    }

    #[test]
    fn fits_predicts_and_round_trips() {
        let config = PipelineConfig {
            k: 4,
            ..PipelineConfig::default()
        };
        let model = TrainedModel::fit(&config, &corpus()).unwrap();
        assert_eq!(model.selected.len(), 4);
        assert_eq!(model.evaluate(&corpus()).unwrap().accuracy, 1.0);
        let dict = model.dictionary();
        assert_eq!(dict[0].rank, 1);
        assert!(dict.iter().all(|e| e.term != "the"));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        let back = TrainedModel::load(&path).unwrap();
        assert_eq!(back, model);
        assert_eq!(
            back.predict_docs(&corpus()).unwrap(),
            model.predict_docs(&corpus()).unwrap()
        );
    }

    #[test]
    fn oversized_k_is_clamped() {
        let config = PipelineConfig {
            k: 5000,
            model: ModelParams::default().with_kind(ModelKind::Lr),
            ranker: Ranker::Recursive,
            ..PipelineConfig::default()
        };
        let model = TrainedModel::fit(&config, &corpus()).unwrap();
        assert_eq!(model.selected.len(), 7);
        assert!(model.note.as_deref().unwrap().contains("clamped"));
    }

    #[test]
    fn dictionary_csv_header() {
        let model = TrainedModel::fit(&PipelineConfig::default(), &corpus()).unwrap();
        let mut out = Vec::new();
        write_dictionary_csv(&mut out, &model.dictionary()).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("rank,term,score,buy_weight,sell_weight\n1,"));
    }
}
