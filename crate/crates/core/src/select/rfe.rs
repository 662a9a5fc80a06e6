use crate::error::{Error, Result};
use crate::labeler::SignalClass;
use crate::vectorizer::DocTermMatrix;

use super::{Ranker, RankerScores};

pub const RFE_STEP_FRACTION: f64 = 0.1;

/// A model that can be refitted on a column subset and report one
/// importance magnitude per column.
pub trait WeightedTrainer {
    fn name(&self) -> String;

    /// `Ok(None)` when the model has no per-feature weight vector.
    fn feature_weights(
        &self,
        m: &DocTermMatrix,
        labels: &[SignalClass],
    ) -> Result<Option<Vec<f64>>>;
}

/// Number of features dropped in each round when pruning `n` down to
/// `target` by `step` of the remaining count.
pub fn rfe_schedule(n: usize, target: usize, step: f64) -> Vec<usize> {
    let mut drops = Vec::new();
    let mut remaining = n;
    while remaining > target {
        let d = ((step * remaining as f64).ceil() as usize).clamp(1, remaining - target);
        drops.push(d);
        remaining -= d;
    }
    drops
}

/// Recursive feature elimination. A feature's score is the round in which it
/// was removed; survivors score one more than the last round.
pub fn rfe(
    trainer: &dyn WeightedTrainer,
    m: &DocTermMatrix,
    labels: &[SignalClass],
    target_k: usize,
    step: f64,
) -> Result<RankerScores> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "elimination step {step} not in (0, 1]"
        )));
    }
    if target_k == 0 {
        return Err(Error::InvalidArgument(
            "target feature count must be at least 1".into(),
        ));
    }
    let n = m.n_cols();
    let mut scores = vec![0.0; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut round = 0usize;
    loop {
        round += 1;
        let sub = m.select_columns(&remaining);
        let weights = trainer
            .feature_weights(&sub, labels)?
            .ok_or_else(|| Error::UnsupportedModel(trainer.name()))?;
        if weights.len() != remaining.len() {
            return Err(Error::DimensionMismatch {
                expected: remaining.len(),
                actual: weights.len(),
            });
        }
        if remaining.len() <= target_k {
            break;
        }
        let drop =
            ((step * remaining.len() as f64).ceil() as usize).clamp(1, remaining.len() - target_k);
        // Weakest first; among equals the higher original index goes first.
        let mut order: Vec<usize> = (0..remaining.len()).collect();
        order.sort_by(|&a, &b| {
            weights[a]
                .abs()
                .total_cmp(&weights[b].abs())
                .then(remaining[b].cmp(&remaining[a]))
        });
        let mut gone = vec![false; remaining.len()];
        for &pos in &order[..drop] {
            gone[pos] = true;
            scores[remaining[pos]] = round as f64;
        }
        let mut next = Vec::with_capacity(remaining.len() - drop);
        for (pos, &f) in remaining.iter().enumerate() {
            if !gone[pos] {
                next.push(f);
            }
        }
        remaining = next;
        if remaining.len() <= target_k {
            round += 1;
            break;
        }
    }
    for &f in &remaining {
        scores[f] = round as f64;
    }
    Ok(RankerScores {
        ranker: Ranker::Recursive,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use SignalClass::{Buy, Sell};

    /// Weight of each column is its index, so column 0 is always weakest.
    struct ByIndex;

    impl WeightedTrainer for ByIndex {
        fn name(&self) -> String {
            "by-index".into()
        }

        fn feature_weights(
            &self,
            m: &DocTermMatrix,
            _: &[SignalClass],
        ) -> Result<Option<Vec<f64>>> {
            // Column values in row 0 carry the original index.
            Ok(Some(m.dense_row(0)))
        }
    }

    struct Opaque;

    impl WeightedTrainer for Opaque {
        fn name(&self) -> String {
            "rbf-svm".into()
        }

        fn feature_weights(
            &self,
            _: &DocTermMatrix,
            _: &[SignalClass],
        ) -> Result<Option<Vec<f64>>> {
            Ok(None)
        }
    }

    fn indexed(n: usize) -> DocTermMatrix {
        DocTermMatrix::from_dense(&[(0..n).map(|i| i as f64 + 1.0).collect(), vec![1.0; n]])
    }

    #[test]
    fn schedule_arithmetic() {
        assert_eq!(rfe_schedule(10, 5, 0.1), [1, 1, 1, 1, 1]);
        assert!(rfe_schedule(10, 10, 0.1).is_empty());
        assert_eq!(rfe_schedule(100, 50, 0.1).iter().sum::<usize>(), 50);
    }

    #[test]
    fn elimination_order() {
        let s = rfe(&ByIndex, &indexed(10), &[Buy, Sell], 5, 0.1).unwrap();
        assert_eq!(s.scores, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 6.0, 6.0, 6.0, 6.0]);
        assert_eq!(&s.ranking()[..5], &[5, 6, 7, 8, 9]);
    }

    #[test]
    fn identity_when_target_covers_all() {
        let s = rfe(&ByIndex, &indexed(4), &[Buy, Sell], 4, 0.1).unwrap();
        assert_eq!(s.scores, [1.0; 4]);
        let s = rfe(&ByIndex, &indexed(4), &[Buy, Sell], 9, 0.1).unwrap();
        assert_eq!(s.scores, [1.0; 4]);
    }

    #[test]
    fn weightless_model_rejected() {
        let err = rfe(&Opaque, &indexed(4), &[Buy, Sell], 2, 0.1).unwrap_err();
        assert!(matches!(err, Error::UnsupportedModel(name) if name == "rbf-svm"));
    }
}
