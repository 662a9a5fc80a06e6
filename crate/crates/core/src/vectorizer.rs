//! Vocabulary, sparse TF-IDF document-term matrix and stock-feature columns.
//!
//! Term weights are raw counts times the smoothed idf
//! `ln((1 + N) / (1 + df)) + 1`, where `N` is the number of documents the
//! vocabulary was fitted on. Each row's word block is then L2-normalised.
//! Stock-feature columns appended afterwards are left unscaled.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::StockContext;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<u32>,
    n_docs: u32,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds the vocabulary from tokenized training documents.
    /// Term indices follow lexicographic order.
    pub fn fit<S: AsRef<str>, D: AsRef<[S]>>(docs: &[D]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::Empty("training corpus"));
        }
        let mut df: BTreeMap<&str, u32> = BTreeMap::new();
        let mut seen: Vec<&str> = Vec::new();
        for doc in docs {
            seen.clear();
            seen.extend(doc.as_ref().iter().map(|t| t.as_ref()));
            seen.sort_unstable();
            seen.dedup();
            for t in &seen {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let (terms, doc_freq): (Vec<String>, Vec<u32>) =
            df.into_iter().map(|(t, n)| (t.to_string(), n)).unzip();
        let mut vocab = Vocabulary {
            terms,
            doc_freq,
            n_docs: docs.len() as u32,
            index: HashMap::new(),
        };
        vocab.rebuild_index();
        Ok(vocab)
    }

    /// Restores the term lookup after deserialization.
    pub fn rebuild_index(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs as usize
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self, index: usize) -> u32 {
        self.doc_freq[index]
    }

    pub fn idf(&self, index: usize) -> f64 {
        let n = self.n_docs as f64;
        ((1.0 + n) / (1.0 + self.doc_freq[index] as f64)).ln() + 1.0
    }

    /// TF-IDF transform. Out-of-vocabulary tokens are ignored.
    pub fn transform<S: AsRef<str>, D: AsRef<[S]>>(&self, docs: &[D]) -> DocTermMatrix {
        let rows = docs
            .iter()
            .map(|d| self.transform_one(d.as_ref()))
            .collect();
        DocTermMatrix {
            rows,
            n_cols: self.len(),
            word_cols: self.len(),
        }
    }

    pub fn transform_one<S: AsRef<str>>(&self, tokens: &[S]) -> SparseRow {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for t in tokens {
            if let Some(i) = self.index_of(t.as_ref()) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        let mut row: SparseRow = counts
            .into_iter()
            .map(|(i, c)| (i as u32, c as f64 * self.idf(i)))
            .collect();
        let norm = row.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut row {
                *w /= norm;
            }
        }
        row
    }
}

/// Sorted `(column, weight)` pairs; zeros are never stored.
pub type SparseRow = Vec<(u32, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTermMatrix {
    rows: Vec<SparseRow>,
    n_cols: usize,
    /// Leading columns that hold word features; the rest are stock features.
    word_cols: usize,
}

impl DocTermMatrix {
    pub fn from_rows(rows: Vec<SparseRow>, n_cols: usize) -> Result<Self> {
        let mut clean = Vec::with_capacity(rows.len());
        for mut row in rows {
            row.retain(|&(_, w)| w != 0.0);
            row.sort_by_key(|&(c, _)| c);
            if let Some(&(c, _)) = row.last() {
                if c as usize >= n_cols {
                    return Err(Error::DimensionMismatch {
                        expected: n_cols,
                        actual: c as usize + 1,
                    });
                }
            }
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidArgument(
                    "duplicate column in sparse row".into(),
                ));
            }
            clean.push(row);
        }
        Ok(DocTermMatrix {
            rows: clean,
            n_cols,
            word_cols: n_cols,
        })
    }

    /// Builds a matrix from dense rows, dropping zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let rows = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &w)| w != 0.0)
                    .map(|(c, &w)| (c as u32, w))
                    .collect()
            })
            .collect();
        DocTermMatrix {
            rows,
            n_cols,
            word_cols: n_cols,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn word_cols(&self) -> usize {
        self.word_cols
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(u32, f64)]> {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for &(c, w) in &self.rows[i] {
            out[c as usize] = w;
        }
        out
    }

    /// L2 norm of the word-feature block of row `i`.
    pub fn word_norm(&self, i: usize) -> f64 {
        self.rows[i]
            .iter()
            .filter(|(c, _)| (*c as usize) < self.word_cols)
            .map(|(_, w)| w * w)
            .sum::<f64>()
            .sqrt()
    }

    /// Keeps the given columns, in the given order. Column `j` of the result
    /// is column `columns[j]` of `self`.
    pub fn select_columns(&self, columns: &[usize]) -> DocTermMatrix {
        let mut remap = vec![u32::MAX; self.n_cols];
        for (new, &old) in columns.iter().enumerate() {
            remap[old] = new as u32;
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut r: SparseRow = row
                    .iter()
                    .filter_map(|&(c, w)| {
                        let n = remap[c as usize];
                        (n != u32::MAX).then_some((n, w))
                    })
                    .collect();
                r.sort_by_key(|&(c, _)| c);
                r
            })
            .collect();
        let word_cols = columns.iter().filter(|&&c| c < self.word_cols).count();
        DocTermMatrix {
            rows,
            n_cols: columns.len(),
            word_cols,
        }
    }

    pub fn select_rows(&self, indices: &[usize]) -> DocTermMatrix {
        DocTermMatrix {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            n_cols: self.n_cols,
            word_cols: self.word_cols,
        }
    }

    /// Appends stock-feature columns after the existing ones. Row `i` of the
    /// matrix must describe `contexts[i]`. `mean_hour_volume` scales the integer
    /// volume feature.
    pub fn append_stock_features(
        &self,
        contexts: &[StockContext],
        which: &[StockFeature],
        mean_hour_volume: f64,
    ) -> Result<DocTermMatrix> {
        if contexts.len() != self.rows.len() {
            return Err(Error::InvalidArgument(format!(
                "{} contexts for {} matrix rows",
                contexts.len(),
                self.rows.len()
            )));
        }
        let width: usize = which.iter().map(|f| f.width()).sum();
        let mut rows = self.rows.clone();
        for (row, ctx) in rows.iter_mut().zip(contexts) {
            let mut col = self.n_cols;
            for f in which {
                for (offset, value) in f.values(ctx, mean_hour_volume).into_iter().enumerate() {
                    if value != 0.0 {
                        row.push(((col + offset) as u32, value));
                    }
                }
                col += f.width();
            }
        }
        Ok(DocTermMatrix {
            rows,
            n_cols: self.n_cols + width,
            word_cols: self.word_cols,
        })
    }

    /// Coordinate-format dump: one `row,col,value` line per stored entry.
    pub fn write_coo<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "row,col,value")?;
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                writeln!(sink, "{r},{c},{w}")?;
            }
        }
        Ok(())
    }
}

/// Quantitative per-document features that can be appended to the word block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum StockFeature {
    /// 1 when the price rose over the hour before the tweet.
    PriceTrend,
    /// Hour volume divided by the training mean hour volume.
    VolumeInt,
    /// 1 when hour volume exceeded the training mean.
    VolumeBinary,
    /// One-hot Monday..Friday, five columns.
    Weekday,
}

impl StockFeature {
    pub const ALL: [StockFeature; 4] = [
        StockFeature::PriceTrend,
        StockFeature::VolumeInt,
        StockFeature::VolumeBinary,
        StockFeature::Weekday,
    ];

    pub fn width(self) -> usize {
        match self {
            StockFeature::Weekday => 5,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StockFeature::PriceTrend => "prior_trend",
            StockFeature::VolumeInt => "volume_int",
            StockFeature::VolumeBinary => "volume_binary",
            StockFeature::Weekday => "weekday",
        }
    }

    /// Column labels, used in dictionary dumps.
    pub fn column_names(self) -> Vec<String> {
        match self {
            StockFeature::Weekday => ["mon", "tue", "wed", "thu", "fri"]
                .iter()
                .map(|d| format!("weekday_{d}"))
                .collect(),
            f => vec![f.name().to_string()],
        }
    }

    pub fn values(self, doc: &StockContext, mean_hour_volume: f64) -> Vec<f64> {
        match self {
            StockFeature::PriceTrend => vec![doc.prior_trend as f64],
            StockFeature::VolumeBinary => {
                let high = if mean_hour_volume > 0.0 {
                    doc.hour_volume as f64 > mean_hour_volume
                } else {
                    doc.volume_high > 0
                };
                vec![f64::from(u8::from(high))]
            }
            StockFeature::VolumeInt => {
                let v = if mean_hour_volume > 0.0 {
                    doc.hour_volume as f64 / mean_hour_volume
                } else {
                    0.0
                };
                vec![v]
            }
            StockFeature::Weekday => {
                let mut v = vec![0.0; 5];
                if let Some(slot) = v.get_mut(doc.weekday as usize) {
                    *slot = 1.0;
                }
                v
            }
        }
    }
}

impl fmt::Display for StockFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StockFeature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "prior_trend" | "price_trend" => Ok(StockFeature::PriceTrend),
            "volume_int" => Ok(StockFeature::VolumeInt),
            "volume_binary" => Ok(StockFeature::VolumeBinary),
            "weekday" => Ok(StockFeature::Weekday),
            other => Err(Error::UnknownFeature(other.to_string())),
        }
    }
}
