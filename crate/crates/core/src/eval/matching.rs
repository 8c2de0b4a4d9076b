//! Greedy one-to-one assignment of hypotheses to ground-truth tracks.

use std::cmp::Ordering;

use crate::scalar::Scalar;

/// Outcome for one hypothesis at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchEntry<S> {
    pub hypothesis: usize,
    /// Matched ground-truth track id, if any.
    pub gt: Option<u64>,
    /// Best IoU against the ground truths still unmatched when this
    /// hypothesis was processed (the match IoU when matched); zero if none.
    pub iou: S,
}

impl<S> MatchEntry<S> {
    pub fn is_true_positive(&self) -> bool {
        self.gt.is_some()
    }
}

/// Ranking used everywhere: descending score, then ascending id.
pub fn rank_order(a: (f64, usize), b: (f64, usize)) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1.cmp(&b.1))
}

/// Matches `hyps` (`(id, score)`) against ground truths `gt_ids` at
/// `threshold`.
///
/// Hypotheses are visited in [`rank_order`]. Each takes the unmatched
/// ground truth of highest IoU at or above the threshold, ties going to the
/// lower track id; otherwise it is a false positive. `iou(h, g)` receives
/// positions into `hyps` and `gt_ids`. The result is in visiting order.
pub fn greedy_match<S, F>(
    gt_ids: &[u64],
    hyps: &[(usize, f64)],
    threshold: &S,
    iou: F,
) -> Vec<MatchEntry<S>>
where
    S: Scalar,
    F: Fn(usize, usize) -> S,
{
    let mut order: Vec<usize> = (0..hyps.len()).collect();
    order.sort_by(|&a, &b| rank_order((hyps[a].1, hyps[a].0), (hyps[b].1, hyps[b].0)));

    let mut gt_order: Vec<usize> = (0..gt_ids.len()).collect();
    gt_order.sort_by_key(|&g| gt_ids[g]);

    let mut taken = vec![false; gt_ids.len()];
    order
        .into_iter()
        .map(|h| {
            let mut best: Option<(usize, S)> = None;
            for &g in gt_order.iter().filter(|&&g| !taken[g]) {
                let v = iou(h, g);
                // Strict comparison keeps the lowest id among equal IoUs.
                if best.as_ref().is_none_or(|(_, b)| v > *b) {
                    best = Some((g, v));
                }
            }
            match best {
                Some((g, v)) if v >= *threshold => {
                    taken[g] = true;
                    MatchEntry {
                        hypothesis: hyps[h].0,
                        gt: Some(gt_ids[g]),
                        iou: v,
                    }
                }
                other => MatchEntry {
                    hypothesis: hyps[h].0,
                    gt: None,
                    iou: other.map_or_else(S::zero, |(_, v)| v),
                },
            }
        })
        .collect()
}
