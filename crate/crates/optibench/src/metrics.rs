//! Binary classification metrics: accuracy and F1.

use crate::error::{Error, Result};

/// Confusion-matrix counts with class 1 as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_positive: u64,
    pub false_positive: u64,
    pub false_negative: u64,
    pub true_negative: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self {
            true_positive: tp,
            false_positive: fp,
            false_negative: fn_,
            true_negative: tn,
        }
    }

    /// Tallies predictions against ground truth.
    pub fn from_predictions(predictions: &[u8], labels: &[u8]) -> Result<Self> {
        if predictions.len() != labels.len() {
            return Err(Error::ShapeMismatch {
                left: vec![predictions.len()],
                right: vec![labels.len()],
            });
        }
        let mut counts = ConfusionCounts::default();
        for (&p, &l) in predictions.iter().zip(labels) {
            match (p == 1, l == 1) {
                (true, true) => counts.true_positive += 1,
                (true, false) => counts.false_positive += 1,
                (false, true) => counts.false_negative += 1,
                (false, false) => counts.true_negative += 1,
            }
        }
        Ok(counts)
    }

    pub fn total(&self) -> u64 {
        self.true_positive + self.false_positive + self.false_negative + self.true_negative
    }
}

/// Fraction of correct predictions.
pub fn accuracy(counts: &ConfusionCounts) -> Result<f64> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::InvalidConfig("accuracy over zero examples".into()));
    }
    Ok((counts.true_positive + counts.true_negative) as f64 / total as f64)
}

/// Harmonic mean of precision and recall, `2PR / (P + R)`.
///
/// Returns 0 when there are no true positives, which avoids 0/0 for
/// degenerate predictors.
pub fn f1_score(counts: &ConfusionCounts) -> Result<f64> {
    if counts.total() == 0 {
        return Err(Error::InvalidConfig("F1 over zero examples".into()));
    }
    let tp = counts.true_positive as f64;
    if counts.true_positive == 0 {
        return Ok(0.0);
    }
    let precision = tp / (tp + counts.false_positive as f64);
    let recall = tp / (tp + counts.false_negative as f64);
    Ok(2.0 * precision * recall / (precision + recall))
}
