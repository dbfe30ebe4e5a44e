use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Labeled, Model};
use crate::error::{Error, Result};

/// Accuracy, F1 and the confusion matrix (`confusion[gold][predicted]`).
///
/// F1 is the positive-class F1 for two classes and macro-F1 otherwise. A
/// class whose F1 denominator is zero contributes 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1: f64,
    pub confusion: Vec<Vec<usize>>,
}

impl Metrics {
    pub fn from_confusion(confusion: Vec<Vec<usize>>) -> Self {
        let n = confusion.len();
        let total: usize = confusion.iter().flatten().sum();
        let correct: usize = (0..n).map(|i| confusion[i][i]).sum();
        let accuracy = if total == 0 { 0.0 } else { correct as f64 / total as f64 };
        let class_f1 = |c: usize| {
            let tp = confusion[c][c];
            let fp: usize = (0..n).filter(|&g| g != c).map(|g| confusion[g][c]).sum();
            let fn_: usize = (0..n).filter(|&p| p != c).map(|p| confusion[c][p]).sum();
            let denom = 2 * tp + fp + fn_;
            if denom == 0 {
                0.0
            } else {
                2.0 * tp as f64 / denom as f64
            }
        };
        let f1 = if n == 2 {
            class_f1(1)
        } else {
            (0..n).map(class_f1).sum::<f64>() / n as f64
        };
        Self {
            accuracy,
            f1,
            confusion,
        }
    }

    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }
}

/// Scores `model` on `examples`. Predictions run in parallel; the confusion
/// matrix is accumulated in example order.
pub fn evaluate<M: Model>(model: &M, examples: &[Labeled<M::Input>]) -> Result<Metrics> {
    if examples.is_empty() {
        return Err(Error::InvalidParameter("cannot evaluate on an empty dataset".into()));
    }
    let preds: Vec<usize> = examples
        .par_iter()
        .map(|ex| model.predict(&ex.input))
        .collect::<Result<_>>()?;
    let n = model.n_classes();
    let mut confusion = vec![vec![0usize; n]; n];
    for (ex, p) in examples.iter().zip(preds) {
        if ex.label >= n {
            return Err(Error::TargetOutOfRange {
                target: ex.label,
                n_classes: n,
            });
        }
        confusion[ex.label][p] += 1;
    }
    Ok(Metrics::from_confusion(confusion))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect() {
        let m = Metrics::from_confusion(vec![vec![5, 0], vec![0, 3]]);
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.f1, 1.0);
    }

    #[test]
    fn all_negative_predictions() {
        let m = Metrics::from_confusion(vec![vec![5, 0], vec![3, 0]]);
        assert_eq!(m.f1, 0.0);
        assert_eq!(m.accuracy, 5.0 / 8.0);
    }

    #[test]
    fn hand_f1() {
        // TP=2 FP=1 FN=1 TN=6: P = R = 2/3, F1 = 2/3
        let m = Metrics::from_confusion(vec![vec![6, 1], vec![1, 2]]);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.accuracy - 0.8).abs() < 1e-15);
    }

    #[test]
    fn macro_f1() {
        // per-class F1: 1.0, 2/3, 0.8
        let m = Metrics::from_confusion(vec![vec![2, 0, 0], vec![0, 1, 1], vec![0, 0, 2]]);
        let expected = (1.0 + 2.0 / 3.0 + 0.8) / 3.0;
        assert!((m.f1 - expected).abs() < 1e-12);
        assert_eq!(m.total(), 6);
    }
}
