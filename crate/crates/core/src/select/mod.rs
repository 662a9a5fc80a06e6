//! Feature ranking: chi-squared and mutual information over term presence,
//! one-way ANOVA F over real weights, and recursive elimination driven by
//! model weights.

mod rfe;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::SignalClass;
use crate::vectorizer::DocTermMatrix;

pub use rfe::{rfe, rfe_schedule, WeightedTrainer, RFE_STEP_FRACTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ranker {
    #[serde(rename = "CS")]
    ChiSquared,
    #[serde(rename = "FV")]
    FValue,
    #[serde(rename = "MI")]
    MutualInfo,
    #[serde(rename = "RFE")]
    Recursive,
}

impl Ranker {
    pub const ALL: [Ranker; 4] = [
        Ranker::ChiSquared,
        Ranker::FValue,
        Ranker::MutualInfo,
        Ranker::Recursive,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Ranker::ChiSquared => "CS",
            Ranker::FValue => "FV",
            Ranker::MutualInfo => "MI",
            Ranker::Recursive => "RFE",
        }
    }
}

impl fmt::Display for Ranker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Ranker {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cs" | "chi2" => Ok(Ranker::ChiSquared),
            "fv" | "f" => Ok(Ranker::FValue),
            "mi" => Ok(Ranker::MutualInfo),
            "rfe" => Ok(Ranker::Recursive),
            other => Err(Error::Config(format!(
                "unknown ranker `{other}` (expected cs, fv, mi or rfe)"
            ))),
        }
    }
}

/// One score per feature; higher ranks first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerScores {
    pub ranker: Ranker,
    pub scores: Vec<f64>,
}

impl RankerScores {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Feature indices by descending score; ties go to the lower index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        idx
    }
}

/// Numbers of Buy and Sell labels; errors unless both are present.
pub(crate) fn class_sizes(labels: &[SignalClass]) -> Result<(usize, usize)> {
    let buy = labels.iter().filter(|c| c.is_buy()).count();
    let sell = labels.len() - buy;
    if buy == 0 || sell == 0 {
        return Err(Error::SingleClass);
    }
    Ok((buy, sell))
}

fn check_rows(m: &DocTermMatrix, labels: &[SignalClass]) -> Result<()> {
    if m.n_rows() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels for {} matrix rows",
            labels.len(),
            m.n_rows()
        )));
    }
    Ok(())
}

/// Per feature, the number of Buy and Sell documents in which it is present.
fn presence_counts(m: &DocTermMatrix, labels: &[SignalClass]) -> Vec<[usize; 2]> {
    let mut counts = vec![[0usize; 2]; m.n_cols()];
    for (row, label) in m.rows().zip(labels) {
        let slot = usize::from(!label.is_buy());
        for &(c, w) in row {
            if w > 0.0 {
                counts[c as usize][slot] += 1;
            }
        }
    }
    counts
}

/// Observed 2x2 table `[[present&buy, present&sell], [absent&buy, absent&sell]]`.
fn table(present: [usize; 2], n_buy: usize, n_sell: usize) -> [[f64; 2]; 2] {
    [
        [present[0] as f64, present[1] as f64],
        [(n_buy - present[0]) as f64, (n_sell - present[1]) as f64],
    ]
}

pub fn chi2_scores(m: &DocTermMatrix, labels: &[SignalClass]) -> Result<RankerScores> {
    check_rows(m, labels)?;
    let (n_buy, n_sell) = class_sizes(labels)?;
    let n = (n_buy + n_sell) as f64;
    let scores = presence_counts(m, labels)
        .into_par_iter()
        .map(|present| {
            let t = table(present, n_buy, n_sell);
            let rows = [t[0][0] + t[0][1], t[1][0] + t[1][1]];
            let cols = [t[0][0] + t[1][0], t[0][1] + t[1][1]];
            let mut score = 0.0;
            for (i, row) in t.iter().enumerate() {
                for (j, &observed) in row.iter().enumerate() {
                    let expected = rows[i] * cols[j] / n;
                    if expected > 0.0 {
                        score += (observed - expected).powi(2) / expected;
                    }
                }
            }
            score
        })
        .collect();
    Ok(RankerScores {
        ranker: Ranker::ChiSquared,
        scores,
    })
}

pub fn mi_scores(m: &DocTermMatrix, labels: &[SignalClass]) -> Result<RankerScores> {
    check_rows(m, labels)?;
    let (n_buy, n_sell) = class_sizes(labels)?;
    let n = (n_buy + n_sell) as f64;
    let scores = presence_counts(m, labels)
        .into_par_iter()
        .map(|present| {
            let t = table(present, n_buy, n_sell);
            let p_term = [(t[0][0] + t[0][1]) / n, (t[1][0] + t[1][1]) / n];
            let p_class = [(t[0][0] + t[1][0]) / n, (t[0][1] + t[1][1]) / n];
            let mut mi = 0.0;
            for (i, row) in t.iter().enumerate() {
                for (j, &count) in row.iter().enumerate() {
                    if count > 0.0 {
                        let joint = count / n;
                        mi += joint * (joint / (p_term[i] * p_class[j])).ln();
                    }
                }
            }
            mi.max(0.0)
        })
        .collect();
    Ok(RankerScores {
        ranker: Ranker::MutualInfo,
        scores,
    })
}

/// Within-group sums of squares at or below this fraction of the total sum
/// of squares count as zero.
pub const ZERO_VARIANCE_TOLERANCE: f64 = 1e-12;

/// One-way ANOVA F statistic per feature. A feature with no between-group
/// spread scores 0; one that separates the classes with no within-group
/// spread scores one more than the largest finite score.
pub fn f_scores(m: &DocTermMatrix, labels: &[SignalClass]) -> Result<RankerScores> {
    check_rows(m, labels)?;
    let (n_buy, n_sell) = class_sizes(labels)?;
    let sizes = [n_buy as f64, n_sell as f64];
    let n = sizes[0] + sizes[1];
    let n_cols = m.n_cols();

    let mut sums = vec![[0.0f64; 2]; n_cols];
    for (row, label) in m.rows().zip(labels) {
        let g = usize::from(!label.is_buy());
        for &(c, w) in row {
            sums[c as usize][g] += w;
        }
    }
    let means: Vec<[f64; 2]> = sums
        .iter()
        .map(|s| [s[0] / sizes[0], s[1] / sizes[1]])
        .collect();

    // Second pass: squared deviations of the stored entries; implicit zeros
    // are added afterwards.
    let mut dev = vec![[0.0f64; 2]; n_cols];
    let mut nnz = vec![[0usize; 2]; n_cols];
    for (row, label) in m.rows().zip(labels) {
        let g = usize::from(!label.is_buy());
        for &(c, w) in row {
            let c = c as usize;
            dev[c][g] += (w - means[c][g]).powi(2);
            nnz[c][g] += 1;
        }
    }

    let df_within = n - 2.0;
    let raw: Vec<Option<f64>> = (0..n_cols)
        .into_par_iter()
        .map(|c| {
            let mu = means[c];
            let grand = (sums[c][0] + sums[c][1]) / n;
            let ssb = sizes[0] * (mu[0] - grand).powi(2) + sizes[1] * (mu[1] - grand).powi(2);
            let ssw: f64 = (0..2)
                .map(|g| dev[c][g] + (sizes[g] - nnz[c][g] as f64) * mu[g].powi(2))
                .sum();
            let sst = ssb + ssw;
            if ssb <= ZERO_VARIANCE_TOLERANCE * sst || sst == 0.0 {
                Some(0.0)
            } else if ssw <= ZERO_VARIANCE_TOLERANCE * sst || df_within <= 0.0 {
                None
            } else {
                Some(ssb / (ssw / df_within))
            }
        })
        .collect();
    let sentinel = raw.iter().flatten().copied().fold(0.0, f64::max) + 1.0;
    Ok(RankerScores {
        ranker: Ranker::FValue,
        scores: raw.into_iter().map(|s| s.unwrap_or(sentinel)).collect(),
    })
}

/// Keeps the `k` best features in rank order. Returns the reduced matrix and
/// the original index of each kept column.
pub fn top_k(
    m: &DocTermMatrix,
    scores: &RankerScores,
    k: usize,
) -> Result<(DocTermMatrix, Vec<usize>)> {
    let kept = top_k_indices(scores, k)?;
    if scores.len() != m.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: m.n_cols(),
            actual: scores.len(),
        });
    }
    Ok((m.select_columns(&kept), kept))
}

pub fn top_k_indices(scores: &RankerScores, k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "feature subset size must be at least 1".into(),
        ));
    }
    if k > scores.len() {
        return Err(Error::InvalidArgument(format!(
            "feature subset size {k} exceeds {} features",
            scores.len()
        )));
    }
    let mut ranking = scores.ranking();
    ranking.truncate(k);
    Ok(ranking)
}
