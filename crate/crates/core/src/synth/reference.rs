//! Brute-force reference evaluator.
//!
//! Deliberately naive: masks are expanded to dense grids, IoU is counted
//! pixel by pixel, every AR cap replays matching on the retained subset, and
//! interpolated precision is taken as a direct maximum over ranks. All
//! arithmetic is exact. It shares only the report type and rounding with
//! [`crate::eval::evaluate`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use super::SynthError;
use crate::dataset::{DatasetManifest, Hypothesis, InstanceTrack};
use crate::eval::{
    standard_diagnostics, to_percent, CategoryMetrics, EvalConfig, EvalCounts, MetricsReport,
    RecallAtCap, Threshold, PROTOCOL,
};
use crate::mask::{rle_decode, BinaryGrid, MaskTrack};
use crate::scalar::{Exact, Scalar};

pub const MAX_VIDEOS: usize = 50;
pub const MAX_INSTANCES_PER_VIDEO: usize = 6;

type Dense = Vec<Option<BinaryGrid>>;

fn densify(track: &MaskTrack) -> Dense {
    track
        .masks()
        .iter()
        .map(|m| m.as_ref().map(rle_decode))
        .collect()
}

fn pixel(frame: &Option<BinaryGrid>, i: usize) -> bool {
    frame.as_ref().is_some_and(|g| g.pixels()[i])
}

fn dense_iou(a: &Dense, b: &Dense) -> Exact {
    let mut inter = 0u64;
    let mut union = 0u64;
    for (fa, fb) in a.iter().zip(b) {
        let n = fa.as_ref().or(fb.as_ref()).map_or(0, |g| g.pixels().len());
        for i in 0..n {
            let (pa, pb) = (pixel(fa, i), pixel(fb, i));
            inter += u64::from(pa && pb);
            union += u64::from(pa || pb);
        }
    }
    if union == 0 {
        Exact::from_count(0)
    } else {
        Exact::from_ratio(inter, union)
    }
}

struct Pred<'a> {
    hyp: &'a Hypothesis,
    dense: Dense,
}

struct Truth<'a> {
    gt: &'a InstanceTrack,
    dense: Dense,
}

fn by_score(a: &Pred<'_>, b: &Pred<'_>) -> Ordering {
    if a.hyp.score > b.hyp.score {
        Ordering::Less
    } else if a.hyp.score < b.hyp.score {
        Ordering::Greater
    } else {
        a.hyp.id.cmp(&b.hyp.id)
    }
}

/// Replays matching in score order; returns `(score, id, is_tp)` per prediction.
fn replay(
    truths: &[&Truth<'_>],
    preds: &[&Pred<'_>],
    threshold: &Exact,
) -> Vec<(f64, usize, bool)> {
    let mut order: Vec<&Pred<'_>> = preds.to_vec();
    order.sort_by(|a, b| by_score(a, b));
    let mut truths: Vec<&Truth<'_>> = truths.to_vec();
    truths.sort_by_key(|t| t.gt.id);
    let mut used = vec![false; truths.len()];
    let mut out = Vec::new();
    for p in order {
        let mut pick: Option<usize> = None;
        let mut best = Exact::from_count(0);
        for (j, t) in truths.iter().enumerate() {
            if used[j] {
                continue;
            }
            let iou = dense_iou(&t.dense, &p.dense);
            if iou >= *threshold && (pick.is_none() || iou > best) {
                pick = Some(j);
                best = iou;
            }
        }
        if let Some(j) = pick {
            used[j] = true;
        }
        out.push((p.hyp.score, p.hyp.id, pick.is_some()));
    }
    out
}

fn direct_ap(mut ranked: Vec<(f64, usize, bool)>, n_gt: usize, recall_points: usize) -> Exact {
    ranked.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let mut points: Vec<(Exact, Exact)> = Vec::new();
    let mut tp = 0u64;
    for (i, r) in ranked.iter().enumerate() {
        if r.2 {
            tp += 1;
        }
        points.push((
            Exact::from_ratio(tp, n_gt as u64),
            Exact::from_ratio(tp, i as u64 + 1),
        ));
    }
    let last = recall_points as u64 - 1;
    let mut sum = Exact::from_count(0);
    for j in 0..=last {
        let level = Exact::from_ratio(j, last);
        let mut best = Exact::from_count(0);
        for (recall, precision) in &points {
            if *recall >= level && *precision > best {
                best = precision.clone();
            }
        }
        sum += best;
    }
    sum / Exact::from_count(recall_points as u64)
}

fn average(values: &[Exact]) -> Option<Exact> {
    if values.is_empty() {
        return None;
    }
    let mut sum = Exact::from_count(0);
    for v in values {
        sum += v.clone();
    }
    Some(sum / Exact::from_count(values.len() as u64))
}

/// Exact, unoptimized evaluation producing a report in the same shape as
/// [`crate::eval::evaluate`]. Refuses inputs above desk scale.
pub fn reference_evaluate(
    manifest: &DatasetManifest,
    hyps: &[Hypothesis],
    config: &EvalConfig,
) -> Result<MetricsReport, SynthError> {
    config
        .validate()
        .map_err(|e| SynthError::BadOp(e.to_string()))?;

    let videos: BTreeSet<u64> = manifest
        .videos()
        .iter()
        .filter(|v| match config.split {
            Some(s) => v.split == s,
            None => true,
        })
        .map(|v| v.id)
        .collect();
    if videos.len() > MAX_VIDEOS {
        return Err(SynthError::TooLarge(format!(
            "{} videos (limit {MAX_VIDEOS})",
            videos.len()
        )));
    }
    let truths: Vec<Truth<'_>> = manifest
        .tracks()
        .iter()
        .filter(|g| videos.contains(&g.video_id))
        .map(|gt| Truth {
            gt,
            dense: densify(&gt.track),
        })
        .collect();
    for v in &videos {
        let n = truths.iter().filter(|t| t.gt.video_id == *v).count();
        if n > MAX_INSTANCES_PER_VIDEO {
            return Err(SynthError::TooLarge(format!(
                "video {v} has {n} instances (limit {MAX_INSTANCES_PER_VIDEO})"
            )));
        }
    }
    let preds: Vec<Pred<'_>> = hyps
        .iter()
        .filter(|h| videos.contains(&h.video_id))
        .filter(|h| match config.score_floor {
            Some(f) => h.score > f,
            None => true,
        })
        .map(|hyp| Pred {
            hyp,
            dense: densify(&hyp.track),
        })
        .collect();

    let mut category_ids: Vec<u32> = truths.iter().map(|t| t.gt.category_id).collect();
    category_ids.sort_unstable();
    category_ids.dedup();

    let thresholds: Vec<Exact> = config
        .iou_thresholds
        .iter()
        .map(|t| Exact::from_ratio(*t.numer(), *t.denom()))
        .collect();

    // Retained predictions per AR cap, chosen per video (or per video and
    // category) by rank.
    let retained: Vec<BTreeSet<usize>> = config
        .ar_caps
        .iter()
        .map(|&cap| {
            let mut kept = BTreeSet::new();
            for v in &videos {
                let cats: Vec<Option<u32>> = match config.ar_scope {
                    crate::eval::ArScope::PerVideo => vec![None],
                    crate::eval::ArScope::PerVideoCategory => preds
                        .iter()
                        .map(|p| Some(p.hyp.category_id))
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect(),
                };
                for c in cats {
                    let mut group: Vec<&Pred<'_>> = preds
                        .iter()
                        .filter(|p| {
                            p.hyp.video_id == *v && c.is_none_or(|c| p.hyp.category_id == c)
                        })
                        .collect();
                    group.sort_by(|a, b| by_score(a, b));
                    kept.extend(group.iter().take(cap).map(|p| p.hyp.id));
                }
            }
            kept
        })
        .collect();

    // ap[c][t] and recall[cap][c][t]
    let mut ap: BTreeMap<u32, Vec<Exact>> = BTreeMap::new();
    let mut recall: Vec<BTreeMap<u32, Vec<Exact>>> = vec![BTreeMap::new(); config.ar_caps.len()];
    for &c in &category_ids {
        let n_gt = truths.iter().filter(|t| t.gt.category_id == c).count();
        for threshold in &thresholds {
            let mut ranked = Vec::new();
            for v in &videos {
                let ts: Vec<&Truth<'_>> = truths
                    .iter()
                    .filter(|t| t.gt.video_id == *v && t.gt.category_id == c)
                    .collect();
                let ps: Vec<&Pred<'_>> = preds
                    .iter()
                    .filter(|p| p.hyp.video_id == *v && p.hyp.category_id == c)
                    .collect();
                ranked.extend(replay(&ts, &ps, threshold));
            }
            ap.entry(c)
                .or_default()
                .push(direct_ap(ranked, n_gt, config.recall_points));

            for (ci, kept) in retained.iter().enumerate() {
                let mut hits = 0u64;
                for v in &videos {
                    let ts: Vec<&Truth<'_>> = truths
                        .iter()
                        .filter(|t| t.gt.video_id == *v && t.gt.category_id == c)
                        .collect();
                    let ps: Vec<&Pred<'_>> = preds
                        .iter()
                        .filter(|p| {
                            p.hyp.video_id == *v
                                && p.hyp.category_id == c
                                && kept.contains(&p.hyp.id)
                        })
                        .collect();
                    hits += replay(&ts, &ps, threshold).iter().filter(|r| r.2).count() as u64;
                }
                recall[ci]
                    .entry(c)
                    .or_default()
                    .push(Exact::from_ratio(hits, n_gt as u64));
            }
        }
    }

    let t_count = thresholds.len();
    let across = |table: &BTreeMap<u32, Vec<Exact>>, t: usize| -> Option<Exact> {
        let column: Vec<Exact> = category_ids.iter().map(|c| table[c][t].clone()).collect();
        average(&column)
    };
    let ap_by_t: Vec<Option<Exact>> = (0..t_count).map(|t| across(&ap, t)).collect();
    let pct = |v: Option<Exact>| v.map(|v| to_percent(v.as_f64()));
    let overall = |by_t: Vec<Option<Exact>>| -> Option<Exact> {
        let present: Option<Vec<Exact>> = by_t.into_iter().collect();
        present.and_then(|v| average(&v))
    };
    let at = |t: Threshold| {
        config
            .iou_thresholds
            .iter()
            .position(|x| *x == t)
            .and_then(|i| ap_by_t[i].clone())
    };

    let ar = config
        .ar_caps
        .iter()
        .enumerate()
        .map(|(ci, &cap)| RecallAtCap {
            cap,
            value: pct(overall(
                (0..t_count).map(|t| across(&recall[ci], t)).collect(),
            )),
        })
        .collect();

    let per_category = manifest
        .categories()
        .iter()
        .map(|c| CategoryMetrics {
            category_id: c.id,
            name: c.name.clone(),
            instances: truths.iter().filter(|t| t.gt.category_id == c.id).count(),
            ap: pct(ap.get(&c.id).and_then(|v| average(v))),
        })
        .collect();

    let annotated: BTreeSet<u64> = truths.iter().map(|t| t.gt.video_id).collect();
    let excluded: Vec<u32> = manifest
        .categories()
        .iter()
        .map(|c| c.id)
        .filter(|id| !category_ids.contains(id))
        .collect();

    Ok(MetricsReport {
        protocol: PROTOCOL.to_owned(),
        config: config.into(),
        counts: EvalCounts {
            videos: videos.len(),
            annotated_videos: annotated.len(),
            instances: truths.len(),
            hypotheses: preds.len(),
        },
        ap: pct(overall(ap_by_t.clone())),
        ap50: pct(at(Threshold::new(1, 2))),
        ap75: pct(at(Threshold::new(3, 4))),
        ar,
        per_category,
        diagnostics: standard_diagnostics(annotated.len(), &excluded, config),
    })
}
