//! Validation grids: accuracy over (model, ranker, subset size), and over
//! the length of the training window.

use std::io::Write;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::labeler::LabeledDocument;
use crate::models::{EvaluationReport, ModelKind};
use crate::pipeline::{labels_of, rank_features, PipelineConfig, TrainedModel};
use crate::select::{Ranker, RankerScores};
use crate::vectorizer::Vocabulary;

pub const DEFAULT_SWEEP_SIZES: [usize; 10] =
    [1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000, 10000];
pub const MAX_WINDOW_MONTHS: u32 = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub model: ModelKind,
    pub ranker: Ranker,
    /// Requested subset size.
    pub size: usize,
    pub effective_size: usize,
    pub accuracy: f64,
    pub report: EvaluationReport,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedCell {
    pub model: ModelKind,
    pub ranker: Ranker,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSweep {
    pub vocabulary_size: usize,
    pub cells: Vec<SweepCell>,
    pub skipped: Vec<SkippedCell>,
}

impl FeatureSweep {
    /// `model,ranker,size,accuracy`
    pub fn write_csv<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "model,ranker,size,accuracy")?;
        for c in &self.cells {
            writeln!(
                sink,
                "{},{},{},{:.6}",
                c.model, c.ranker, c.size, c.accuracy
            )?;
        }
        Ok(())
    }

    pub fn best(&self) -> Option<&SweepCell> {
        self.cells
            .iter()
            .fold(None, |best: Option<&SweepCell>, c| match best {
                Some(b) if b.accuracy >= c.accuracy => Some(b),
                _ => Some(c),
            })
    }

    pub fn cell(&self, model: ModelKind, ranker: Ranker, size: usize) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.model == model && c.ranker == ranker && c.size == size)
    }
}

/// Trains on `train` and scores on `validation` for every combination.
/// Rankers that cannot run for a model are listed in `skipped`.
pub fn feature_sweep(
    train: &[LabeledDocument],
    validation: &[LabeledDocument],
    base: &PipelineConfig,
    models: &[ModelKind],
    rankers: &[Ranker],
    sizes: &[usize],
) -> Result<FeatureSweep> {
    if validation.is_empty() {
        return Err(Error::Empty("validation set"));
    }
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Config(
            "subset sizes must be non-empty and positive".into(),
        ));
    }
    let tokens: Vec<&[String]> = train.iter().map(|d| d.tokens.as_slice()).collect();
    let vocabulary = Vocabulary::fit(&tokens)?;
    let x = vocabulary.transform(&tokens);
    let labels = labels_of(train);
    let min_size = sizes
        .iter()
        .copied()
        .min()
        .unwrap_or(1)
        .min(vocabulary.len());

    let combos: Vec<(ModelKind, Ranker)> = models
        .iter()
        .flat_map(|&m| rankers.iter().map(move |&r| (m, r)))
        .collect();
    let scored: Vec<(ModelKind, Ranker, Result<RankerScores>)> = combos
        .par_iter()
        .map(|&(kind, ranker)| {
            let params = base.model.with_kind(kind);
            (
                kind,
                ranker,
                rank_features(ranker, &params, &x, &labels, min_size),
            )
        })
        .collect();

    let mut skipped = Vec::new();
    let mut jobs = Vec::new();
    for (kind, ranker, scores) in scored {
        match scores {
            Ok(s) => {
                for &size in sizes {
                    jobs.push((kind, ranker, size, s.clone()));
                }
            }
            Err(e @ Error::UnsupportedModel(_)) => skipped.push(SkippedCell {
                model: kind,
                ranker,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }

    let cells = jobs
        .into_par_iter()
        .map(|(kind, ranker, size, scores)| {
            let config = PipelineConfig {
                model: base.model.with_kind(kind),
                ranker,
                k: size,
                stock_features: base.stock_features.clone(),
            };
            let model = TrainedModel::fit_matrix(
                &config,
                vocabulary.clone(),
                &x,
                train,
                &labels,
                Some(&scores),
            )?;
            let report = model.evaluate(validation)?;
            Ok(SweepCell {
                model: kind,
                ranker,
                size,
                effective_size: model.selected.len(),
                accuracy: report.accuracy,
                report,
                note: model.note,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureSweep {
        vocabulary_size: vocabulary.len(),
        cells,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowCell {
    pub months: u32,
    pub n_train: usize,
    /// `None` when the cell could not be trained.
    pub accuracy: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSweep {
    pub validation_start: NaiveDate,
    pub cells: Vec<WindowCell>,
}

impl WindowSweep {
    /// `months,accuracy,n_train`; missing cells leave accuracy blank.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "months,accuracy,n_train")?;
        for c in &self.cells {
            let acc = c.accuracy.map(|a| format!("{a:.6}")).unwrap_or_default();
            writeln!(sink, "{},{},{}", c.months, acc, c.n_train)?;
        }
        Ok(())
    }

    /// Window length with the highest accuracy; shorter wins ties.
    pub fn peak(&self) -> Option<&WindowCell> {
        self.cells.iter().filter(|c| c.accuracy.is_some()).fold(
            None,
            |best: Option<&WindowCell>, c| match best {
                Some(b) if b.accuracy >= c.accuracy => Some(b),
                _ => Some(c),
            },
        )
    }
}

/// Whole calendar months from `date`'s month up to `reference`'s month;
/// the month just before `reference` is 1.
pub fn months_before(date: NaiveDate, reference: NaiveDate) -> i64 {
    let idx = |d: NaiveDate| d.year() as i64 * 12 + d.month0() as i64;
    idx(reference) - idx(date)
}

/// For each window of 1..=`max_months` calendar months ending just before
/// the month of `validation_start`, trains on `history` inside the window
/// and scores on `validation`. A window whose oldest month holds no
/// documents is reported as missing.
pub fn window_sweep(
    history: &[LabeledDocument],
    validation: &[LabeledDocument],
    validation_start: NaiveDate,
    config: &PipelineConfig,
    max_months: u32,
) -> Result<WindowSweep> {
    if validation.is_empty() {
        return Err(Error::Empty("validation set"));
    }
    if max_months == 0 {
        return Err(Error::Config(
            "window sweep needs at least one month".into(),
        ));
    }
    let offsets: Vec<i64> = history
        .iter()
        .map(|d| months_before(d.timestamp.date(), validation_start))
        .collect();
    let available = offsets
        .iter()
        .copied()
        .filter(|&o| o >= 1)
        .max()
        .unwrap_or(0);
    if (max_months as i64) > available {
        return Err(Error::InvalidArgument(format!(
            "a {max_months}-month window exceeds the {available} months of history before {validation_start}"
        )));
    }
    let cells = (1..=max_months)
        .into_par_iter()
        .map(|k| {
            let window: Vec<LabeledDocument> = history
                .iter()
                .zip(&offsets)
                .filter(|(_, &o)| o >= 1 && o <= k as i64)
                .map(|(d, _)| d.clone())
                .collect();
            let oldest_empty = !offsets.contains(&(k as i64));
            if oldest_empty {
                return Ok(WindowCell {
                    months: k,
                    n_train: window.len(),
                    accuracy: None,
                    note: Some(format!("month {k} before validation has no documents")),
                });
            }
            match TrainedModel::fit(config, &window) {
                Ok(model) => Ok(WindowCell {
                    months: k,
                    n_train: window.len(),
                    accuracy: Some(model.evaluate(validation)?.accuracy),
                    note: model.note,
                }),
                Err(e @ (Error::SingleClass | Error::Empty(_))) => Ok(WindowCell {
                    months: k,
                    n_train: window.len(),
                    accuracy: None,
                    note: Some(e.to_string()),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WindowSweep {
        validation_start,
        cells,
    })
}
