//! ROC-AUC and accuracy for binary scores.

use crate::error::{Error, Result};

/// Scores paired with 0/1 labels.
#[derive(Debug, Clone, Copy)]
pub struct ScoredLabels<'a> {
    pub scores: &'a [f64],
    pub labels: &'a [u8],
}

impl<'a> ScoredLabels<'a> {
    pub fn new(scores: &'a [f64], labels: &'a [u8]) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} scores for {} labels",
                scores.len(),
                labels.len()
            )));
        }
        Ok(ScoredLabels { scores, labels })
    }

    pub fn auc(&self) -> Result<f64> {
        auc(self.scores, self.labels)
    }

    pub fn accuracy(&self, threshold: f64) -> f64 {
        accuracy(self.scores, self.labels, threshold)
    }
}

/// Mann-Whitney AUC: the fraction of (positive, negative) pairs ordered
/// correctly, ties counting one half.
///
/// Runs in `O(k log k)` by sweeping tie groups in score order. The
/// numerator is accumulated in integers (doubled to keep the halves), so the
/// result equals the pairwise count exactly.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let mut scratch = Vec::with_capacity(scores.len());
    auc_with(scores, labels, &mut scratch)
}

pub(crate) fn auc_with(scores: &[f64], labels: &[u8], scratch: &mut Vec<(f64, u8)>) -> Result<f64> {
    debug_assert_eq!(scores.len(), labels.len());
    scratch.clear();
    scratch.extend(scores.iter().copied().zip(labels.iter().copied()));
    scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let mut neg_below: u64 = 0;
    let mut twice_num: u64 = 0;
    let (mut n_pos, mut n_neg) = (0u64, 0u64);
    let mut i = 0;
    while i < scratch.len() {
        let s = scratch[i].0;
        let (mut g_pos, mut g_neg) = (0u64, 0u64);
        while i < scratch.len() && scratch[i].0 == s {
            if scratch[i].1 == 1 {
                g_pos += 1;
            } else {
                g_neg += 1;
            }
            i += 1;
        }
        twice_num += 2 * g_pos * neg_below + g_pos * g_neg;
        neg_below += g_neg;
        n_pos += g_pos;
        n_neg += g_neg;
    }
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok(twice_num as f64 / (2 * n_pos * n_neg) as f64)
}

/// Fraction of rows where `score > threshold` agrees with the label.
pub fn accuracy(scores: &[f64], labels: &[u8], threshold: f64) -> f64 {
    debug_assert_eq!(scores.len(), labels.len());
    if scores.is_empty() {
        return 0.0;
    }
    let hits = scores
        .iter()
        .zip(labels)
        .filter(|(&s, &y)| u8::from(s > threshold) == y)
        .count();
    hits as f64 / scores.len() as f64
}
