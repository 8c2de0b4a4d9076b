//! Interpolated precision-recall curves.

use crate::scalar::{mean, Scalar};

/// Interpolated precision at `recall_points` evenly spaced recall levels
/// on `[0, 1]`.
///
/// `ranked_tp` flags each ranked hypothesis as a true positive. Precision is
/// replaced by its running maximum from the right, and each recall level
/// takes the envelope at the first rank reaching it (zero if never reached).
/// Returns `None` when `n_gt` is zero.
pub fn pr_curve<S: Scalar>(
    ranked_tp: &[bool],
    n_gt: usize,
    recall_points: usize,
) -> Option<Vec<S>> {
    if n_gt == 0 {
        return None;
    }
    let mut recall = Vec::with_capacity(ranked_tp.len());
    let mut precision: Vec<S> = Vec::with_capacity(ranked_tp.len());
    let mut tp = 0u64;
    for (i, &hit) in ranked_tp.iter().enumerate() {
        tp += u64::from(hit);
        recall.push(S::from_ratio(tp, n_gt as u64));
        precision.push(S::from_ratio(tp, i as u64 + 1));
    }
    for i in (0..precision.len().saturating_sub(1)).rev() {
        if precision[i + 1] > precision[i] {
            precision[i] = precision[i + 1].clone();
        }
    }
    let last = recall_points as u64 - 1;
    Some(
        (0..=last)
            .map(|j| {
                let level = S::from_ratio(j, last);
                let i = recall.partition_point(|r| *r < level);
                precision.get(i).cloned().unwrap_or_else(S::zero)
            })
            .collect(),
    )
}

/// Mean interpolated precision; `None` when `n_gt` is zero.
pub fn average_precision<S: Scalar>(
    ranked_tp: &[bool],
    n_gt: usize,
    recall_points: usize,
) -> Option<S> {
    pr_curve::<S>(ranked_tp, n_gt, recall_points).and_then(|q| mean(&q))
}
