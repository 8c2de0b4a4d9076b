//! Run-list evaluator: spatiotemporal IoU on RLE tracks, greedy matching,
//! pooled precision-recall per category.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use super::config::{ArScope, EvalConfig, Threshold};
use super::matching::{greedy_match, rank_order, MatchEntry};
use super::pr::average_precision;
use super::report::{
    standard_diagnostics, to_percent, CategoryMetrics, EvalCounts, MetricsReport, RecallAtCap,
    PROTOCOL,
};
use super::EvalError;
use crate::dataset::{DatasetManifest, Hypothesis, InstanceTrack};
use crate::mask::overlap_counts;
use crate::scalar::{mean, Scalar};

/// Matches of one (video, category) pair at every threshold.
#[derive(Debug, Clone)]
pub struct UnitMatches<S> {
    pub video_id: u64,
    pub category_id: u32,
    pub gt_ids: Vec<u64>,
    /// `per_threshold[t]` lists hypotheses in rank order.
    pub per_threshold: Vec<Vec<MatchEntry<S>>>,
}

struct Scope<'a> {
    videos: Vec<u64>,
    gts: Vec<&'a InstanceTrack>,
    hyps: Vec<&'a Hypothesis>,
}

fn scope<'a>(
    manifest: &'a DatasetManifest,
    hyps: &'a [Hypothesis],
    config: &EvalConfig,
) -> Scope<'a> {
    let videos: BTreeSet<u64> = manifest
        .videos()
        .iter()
        .filter(|v| config.split.is_none_or(|s| v.split == s))
        .map(|v| v.id)
        .collect();
    Scope {
        gts: manifest
            .tracks()
            .iter()
            .filter(|t| videos.contains(&t.video_id))
            .collect(),
        hyps: hyps
            .iter()
            .filter(|h| videos.contains(&h.video_id))
            .filter(|h| config.score_floor.is_none_or(|f| h.score > f))
            .collect(),
        videos: videos.into_iter().collect(),
    }
}

fn thresholds<S: Scalar>(ts: &[Threshold]) -> Vec<S> {
    ts.iter()
        .map(|t| S::from_ratio(*t.numer(), *t.denom()))
        .collect()
}

fn match_scope<S: Scalar>(
    scope: &Scope<'_>,
    config: &EvalConfig,
) -> Result<Vec<UnitMatches<S>>, EvalError> {
    type Unit<'a> = (Vec<&'a InstanceTrack>, Vec<&'a Hypothesis>);
    let mut units: BTreeMap<(u64, u32), Unit<'_>> = BTreeMap::new();
    for &g in &scope.gts {
        units
            .entry((g.video_id, g.category_id))
            .or_default()
            .0
            .push(g);
    }
    for &h in &scope.hyps {
        units
            .entry((h.video_id, h.category_id))
            .or_default()
            .1
            .push(h);
    }
    let thresholds: Vec<S> = thresholds(&config.iou_thresholds);
    let units: Vec<_> = units.into_iter().collect();
    units
        .par_iter()
        .map(|((video_id, category_id), (gts, hyps))| {
            let mut ious = Vec::with_capacity(hyps.len());
            for h in hyps {
                let row = gts
                    .iter()
                    .map(|g| overlap_counts(&g.track, &h.track).map(|c| c.ratio::<S>()))
                    .collect::<Result<Vec<S>, _>>()?;
                ious.push(row);
            }
            let gt_ids: Vec<u64> = gts.iter().map(|g| g.id).collect();
            let ranked: Vec<(usize, f64)> = hyps.iter().map(|h| (h.id, h.score)).collect();
            let per_threshold = thresholds
                .iter()
                .map(|t| greedy_match(&gt_ids, &ranked, t, |h, g| ious[h][g].clone()))
                .collect();
            Ok(UnitMatches {
                video_id: *video_id,
                category_id: *category_id,
                gt_ids,
                per_threshold,
            })
        })
        .collect()
}

/// Per-(video, category, threshold) matches for the configured scope.
pub fn match_all<S: Scalar>(
    manifest: &DatasetManifest,
    hyps: &[Hypothesis],
    config: &EvalConfig,
) -> Result<Vec<UnitMatches<S>>, EvalError> {
    config.validate()?;
    match_scope(&scope(manifest, hyps, config), config)
}

/// Ids of hypotheses kept under an AR cap of `cap`.
fn retained(hyps: &[&Hypothesis], cap: usize, scope: ArScope) -> HashSet<usize> {
    let mut groups = BTreeMap::<(u64, Option<u32>), Vec<(f64, usize)>>::new();
    for h in hyps {
        let key = match scope {
            ArScope::PerVideo => (h.video_id, None),
            ArScope::PerVideoCategory => (h.video_id, Some(h.category_id)),
        };
        groups.entry(key).or_default().push((h.score, h.id));
    }
    groups
        .into_values()
        .flat_map(|mut g| {
            g.sort_by(|a, b| rank_order(*a, *b));
            g.into_iter().take(cap).map(|(_, id)| id)
        })
        .collect()
}

/// Evaluates `hyps` against `manifest` using the global rayon pool.
pub fn evaluate<S: Scalar>(
    manifest: &DatasetManifest,
    hyps: &[Hypothesis],
    config: &EvalConfig,
) -> Result<MetricsReport, EvalError> {
    config.validate()?;
    let mut ids: Vec<usize> = hyps.iter().map(|h| h.id).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(EvalError::DuplicateHypothesis(w[0]));
    }
    let scope = scope(manifest, hyps, config);
    let units = match_scope::<S>(&scope, config)?;

    let t_count = config.iou_thresholds.len();
    let mut n_gt: BTreeMap<u32, usize> = BTreeMap::new();
    for g in &scope.gts {
        *n_gt.entry(g.category_id).or_default() += 1;
    }
    let scores: HashMap<usize, f64> = scope.hyps.iter().map(|h| (h.id, h.score)).collect();

    // Pooled (score, id, tp-per-threshold) per category.
    let mut pooled: BTreeMap<u32, Vec<(f64, usize, Vec<bool>)>> = BTreeMap::new();
    for unit in &units {
        let rows = pooled.entry(unit.category_id).or_default();
        let mut by_hyp: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
        for entries in &unit.per_threshold {
            for e in entries {
                by_hyp
                    .entry(e.hypothesis)
                    .or_default()
                    .push(e.is_true_positive());
            }
        }
        rows.extend(by_hyp.into_iter().map(|(id, tp)| (scores[&id], id, tp)));
    }
    for rows in pooled.values_mut() {
        rows.sort_by(|a, b| rank_order((a.0, a.1), (b.0, b.1)));
    }

    let kept: Vec<HashSet<usize>> = config
        .ar_caps
        .iter()
        .map(|&k| retained(&scope.hyps, k, config.ar_scope))
        .collect();

    // ap[c][t], recall[c][cap][t] for categories with ground truth.
    let mut ap: BTreeMap<u32, Vec<S>> = BTreeMap::new();
    let mut recall: BTreeMap<u32, Vec<Vec<S>>> = BTreeMap::new();
    for (&cat, &n) in &n_gt {
        let rows = pooled.get(&cat).map(Vec::as_slice).unwrap_or(&[]);
        let per_t = (0..t_count)
            .map(|t| {
                let ranked: Vec<bool> = rows.iter().map(|r| r.2[t]).collect();
                average_precision::<S>(&ranked, n, config.recall_points)
                    .expect("category has ground truth")
            })
            .collect();
        ap.insert(cat, per_t);
        let per_cap = kept
            .iter()
            .map(|keep| {
                (0..t_count)
                    .map(|t| {
                        let hits = rows
                            .iter()
                            .filter(|r| r.2[t] && keep.contains(&r.1))
                            .count();
                        S::from_ratio(hits as u64, n as u64)
                    })
                    .collect()
            })
            .collect();
        recall.insert(cat, per_cap);
    }

    // Mean over categories with ground truth; `None` if there are none.
    let over_categories = |f: &dyn Fn(u32) -> S| -> Option<S> {
        let vals: Vec<S> = n_gt.keys().map(|&c| f(c)).collect();
        mean(&vals)
    };
    let ap_at = |t: usize| over_categories(&|c| ap[&c][t].clone());
    let ap_by_t: Option<Vec<S>> = (0..t_count).map(ap_at).collect();
    let pct = |v: Option<S>| v.map(|v| to_percent(v.as_f64()));

    let headline_ap = ap_by_t.as_ref().and_then(|v| mean(v));
    let fixed = |t: Threshold| {
        config
            .threshold_index(t)
            .and_then(|i| ap_by_t.as_ref().map(|v| v[i].clone()))
    };
    let ar = config
        .ar_caps
        .iter()
        .enumerate()
        .map(|(ci, &cap)| {
            let by_t: Option<Vec<S>> = (0..t_count)
                .map(|t| over_categories(&|c| recall[&c][ci][t].clone()))
                .collect();
            RecallAtCap {
                cap,
                value: pct(by_t.and_then(|v| mean(&v))),
            }
        })
        .collect();

    let per_category = manifest
        .categories()
        .iter()
        .map(|c| CategoryMetrics {
            category_id: c.id,
            name: c.name.clone(),
            instances: n_gt.get(&c.id).copied().unwrap_or(0),
            ap: pct(ap.get(&c.id).and_then(|v| mean(v))),
        })
        .collect();

    let annotated: BTreeSet<u64> = scope.gts.iter().map(|g| g.video_id).collect();
    let excluded: Vec<u32> = manifest
        .categories()
        .iter()
        .map(|c| c.id)
        .filter(|id| !n_gt.contains_key(id))
        .collect();

    Ok(MetricsReport {
        protocol: PROTOCOL.to_owned(),
        config: config.into(),
        counts: EvalCounts {
            videos: scope.videos.len(),
            annotated_videos: annotated.len(),
            instances: scope.gts.len(),
            hypotheses: scope.hyps.len(),
        },
        ap: pct(headline_ap),
        ap50: pct(fixed(Threshold::new(1, 2))),
        ap75: pct(fixed(Threshold::new(3, 4))),
        ar,
        per_category,
        diagnostics: standard_diagnostics(annotated.len(), &excluded, config),
    })
}

/// [`evaluate`] on a dedicated pool of `workers` threads. The report does not
/// depend on `workers`.
pub fn evaluate_with_workers<S: Scalar>(
    manifest: &DatasetManifest,
    hyps: &[Hypothesis],
    config: &EvalConfig,
    workers: usize,
) -> Result<MetricsReport, EvalError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| EvalError::Pool(e.to_string()))?;
    pool.install(|| evaluate::<S>(manifest, hyps, config))
}
