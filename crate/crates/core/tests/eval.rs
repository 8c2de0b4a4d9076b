mod common;

use avis_core::dataset::{load_ground_truth, load_predictions};
use avis_core::eval::{
    evaluate, evaluate_with_workers, match_all, ArScope, EvalConfig, EvalError, Threshold,
};
use avis_core::mask::{FrameMask, MaskTrack};
use avis_core::synth::reference_evaluate;
use avis_core::{DatasetManifest, Exact, Hypothesis, MetricsReport, Scalar};
use serde_json::json;

fn eval(m: &DatasetManifest, h: &[Hypothesis]) -> MetricsReport {
    evaluate::<f64>(m, h, &EvalConfig::default()).unwrap()
}

#[test]
fn oracle_predictions_score_100() {
    for seed in 0..8 {
        let s = common::scene(seed);
        let r = eval(&s.manifest, &s.oracle);
        assert_eq!(r.ap, Some(100.0));
        assert_eq!(r.ap50, Some(100.0));
        assert_eq!(r.ap75, Some(100.0));
        assert_eq!(r.recall_at(10), Some(100.0));
    }
}

#[test]
fn empty_predictions_score_zero() {
    let s = common::scene(3);
    let r = eval(&s.manifest, &[]);
    assert_eq!(r.ap, Some(0.0));
    assert_eq!(r.recall_at(1), Some(0.0));
    assert_eq!(r.recall_at(10), Some(0.0));
}

#[test]
fn no_annotations_means_absent_metrics() {
    let doc = json!({
        "categories": [{"id": 1, "name": "car", "scenario": "machine"}],
        "videos": [{"id": 1, "name": "v", "width": 4, "height": 4, "frame_count": 1, "fps": 1.0, "file_names": ["f"]}],
        "annotations": []
    });
    let m = load_ground_truth(&doc.to_string()).unwrap();
    let r = eval(&m, &[]);
    assert_eq!((r.ap, r.ap50, r.ap75), (None, None, None));
    assert!(r.ar.iter().all(|a| a.value.is_none()));
    assert!(r.diagnostics[0].contains("no annotated videos"));
    assert_eq!(r.counts.annotated_videos, 0);
}

/// Two ground truths of one category in one 4x4, 1-frame video. One
/// hypothesis hits the first exactly; two more miss everything.
fn two_gt_fixture() -> (DatasetManifest, Vec<Hypothesis>) {
    let doc = json!({
        "categories": [{"id": 1, "name": "dog", "scenario": "animal"}],
        "videos": [{"id": 1, "name": "v", "width": 4, "height": 4, "frame_count": 1, "fps": 1.0, "file_names": ["f"]}],
        "annotations": [
            {"id": 1, "video_id": 1, "category_id": 1, "segmentations": [{"size": [4, 4], "counts": [0, 2, 14]}]},
            {"id": 2, "video_id": 1, "category_id": 1, "segmentations": [{"size": [4, 4], "counts": [8, 2, 6]}]}
        ]
    });
    let preds = json!([
        {"video_id": 1, "category_id": 1, "score": 0.9, "segmentations": [{"size": [4, 4], "counts": [0, 2, 14]}]},
        {"video_id": 1, "category_id": 1, "score": 0.8, "segmentations": [{"size": [4, 4], "counts": [14, 2]}]},
        {"video_id": 1, "category_id": 1, "score": 0.7, "segmentations": [{"size": [4, 4], "counts": [4, 2, 10]}]}
    ]);
    let m = load_ground_truth(&doc.to_string()).unwrap();
    let h = load_predictions(&preds.to_string(), &m).unwrap();
    (m, h)
}

#[test]
fn tp_fp_fp_over_two_ground_truths() {
    let (m, h) = two_gt_fixture();
    let r = evaluate::<Exact>(&m, &h, &EvalConfig::default()).unwrap();
    let expected = 100.0 * 51.0 / 101.0;
    for v in [r.ap, r.ap50, r.ap75] {
        assert!((v.unwrap() - expected).abs() < 1e-5);
    }
    assert_eq!(r.recall_at(1), Some(50.0));
    assert_eq!(
        r,
        reference_evaluate(&m, &h, &EvalConfig::default()).unwrap()
    );
}

#[test]
fn score_floor_drops_low_scores() {
    let (m, h) = two_gt_fixture();
    let config = EvalConfig {
        score_floor: Some(0.75),
        ..EvalConfig::default()
    };
    let r = evaluate::<f64>(&m, &h, &config).unwrap();
    assert_eq!(r.counts.hypotheses, 2);
    // Floor is exclusive: a hypothesis scoring exactly the floor is dropped.
    let config = EvalConfig {
        score_floor: Some(0.8),
        ..EvalConfig::default()
    };
    assert_eq!(
        evaluate::<f64>(&m, &h, &config).unwrap().counts.hypotheses,
        1
    );
}

#[test]
fn match_results_respect_single_assignment() {
    let s = common::scene(13);
    let hyps = common::degrade(&s, 13);
    let config = EvalConfig::default();
    let units = match_all::<Exact>(&s.manifest, &hyps, &config).unwrap();
    for u in &units {
        for (t, entries) in u.per_threshold.iter().enumerate() {
            let thr = config.iou_thresholds[t];
            let thr = Exact::from_ratio(*thr.numer(), *thr.denom());
            let mut seen = std::collections::HashSet::new();
            for e in entries {
                if let Some(g) = e.gt {
                    assert!(seen.insert(g));
                    assert!(e.iou >= thr);
                }
            }
        }
    }
}

#[test]
fn duplicate_hypothesis_ids_are_rejected() {
    let s = common::scene(1);
    let mut hyps = s.oracle.clone();
    hyps.push(hyps[0].clone());
    assert!(matches!(
        evaluate::<f64>(&s.manifest, &hyps, &EvalConfig::default()),
        Err(EvalError::DuplicateHypothesis(0))
    ));
}

#[test]
fn score_transform_invariance() {
    for seed in 0..20 {
        let s = common::scene(seed);
        let hyps = common::degrade(&s, seed);
        let squashed: Vec<Hypothesis> = hyps
            .iter()
            .map(|h| Hypothesis {
                score: h.score * h.score * 0.5,
                ..h.clone()
            })
            .collect();
        assert_eq!(
            eval(&s.manifest, &hyps),
            eval(&s.manifest, &squashed),
            "seed {seed}"
        );
    }
}

/// Renames category ids by `id -> n + 1 - id` in both ground truth and predictions.
fn relabel(m: &DatasetManifest, hyps: &[Hypothesis]) -> (DatasetManifest, Vec<Hypothesis>) {
    let n = m.categories().len() as u32;
    let flip = |id: u32| n + 1 - id;
    let mut doc = m.to_document();
    for c in &mut doc.categories {
        c.id = flip(c.id);
    }
    for a in &mut doc.annotations {
        a.category_id = flip(a.category_id);
    }
    let hyps = hyps
        .iter()
        .map(|h| Hypothesis {
            category_id: flip(h.category_id),
            ..h.clone()
        })
        .collect();
    (DatasetManifest::from_document(doc).unwrap(), hyps)
}

#[test]
fn category_relabel_invariance() {
    for seed in 0..20 {
        let s = common::scene(seed);
        let hyps = common::degrade(&s, seed);
        let a = eval(&s.manifest, &hyps);
        let (m2, h2) = relabel(&s.manifest, &hyps);
        let b = eval(&m2, &h2);
        assert_eq!(
            (a.ap, a.ap50, a.ap75, &a.ar),
            (b.ap, b.ap50, b.ap75, &b.ar),
            "seed {seed}"
        );
    }
}

#[test]
fn trailing_false_positive_leaves_ap_unchanged() {
    for seed in 0..20 {
        let s = common::scene(seed);
        let hyps = common::degrade(&s, seed);
        let before = eval(&s.manifest, &hyps);
        let min = hyps.iter().map(|h| h.score).fold(1.0, f64::min);
        let v = &s.manifest.videos()[0];
        let mut more = hyps.clone();
        more.push(Hypothesis {
            id: hyps.len(),
            video_id: v.id,
            category_id: 1,
            score: min / 2.0,
            track: MaskTrack::absent(v.height, v.width, v.frame_count),
        });
        let after = eval(&s.manifest, &more);
        assert_eq!(before.ap, after.ap, "seed {seed}");
        assert_eq!(before.per_category, after.per_category, "seed {seed}");
    }
}

/// Uncapped recall per (category, threshold): matched ground truths over all
/// ground truths, from the raw match results.
fn max_recall(m: &DatasetManifest, hyps: &[Hypothesis]) -> Vec<((u32, usize), Exact)> {
    let config = EvalConfig::default();
    let units = match_all::<Exact>(m, hyps, &config).unwrap();
    let mut out = Vec::new();
    for c in m.categories() {
        let n_gt = m.tracks().iter().filter(|t| t.category_id == c.id).count() as u64;
        if n_gt == 0 {
            continue;
        }
        for t in 0..config.iou_thresholds.len() {
            let hits: usize = units
                .iter()
                .filter(|u| u.category_id == c.id)
                .map(|u| {
                    u.per_threshold[t]
                        .iter()
                        .filter(|e| e.is_true_positive())
                        .count()
                })
                .sum();
            out.push(((c.id, t), Exact::from_ratio(hits as u64, n_gt)));
        }
    }
    out
}

#[test]
fn removing_a_hypothesis_never_raises_recall() {
    for seed in 0..20 {
        let s = common::scene(seed);
        let hyps = common::degrade(&s, seed);
        let before = max_recall(&s.manifest, &hyps);
        for drop in 0..hyps.len() {
            let fewer: Vec<Hypothesis> = hyps.iter().filter(|h| h.id != drop).cloned().collect();
            let after = max_recall(&s.manifest, &fewer);
            for (a, b) in after.iter().zip(&before) {
                assert_eq!(a.0, b.0);
                assert!(a.1 <= b.1, "seed {seed} drop {drop} at {:?}", a.0);
            }
        }
    }
}

#[test]
fn capped_recall_can_rise_when_a_top_false_positive_is_removed() {
    // A 0.95 miss takes the only top-1 slot; removing it lets the 0.9 hit in.
    let (m, mut h) = two_gt_fixture();
    let mut miss = h[1].clone();
    miss.id = 3;
    miss.score = 0.95;
    h.push(miss);
    let config = EvalConfig::default();
    let with_miss = evaluate::<f64>(&m, &h, &config).unwrap();
    h.pop();
    let without = evaluate::<f64>(&m, &h, &config).unwrap();
    assert_eq!(with_miss.recall_at(1), Some(0.0));
    assert_eq!(without.recall_at(1), Some(50.0));
}

#[test]
fn ap50_bounds_ap() {
    for seed in 0..20 {
        let s = common::scene(seed);
        let r = eval(&s.manifest, &common::degrade(&s, seed));
        assert!(r.ap50.unwrap() >= r.ap.unwrap());
        assert!((0.0..=100.0).contains(&r.ap.unwrap()));
    }
}

#[test]
fn one_flipped_category_matches_reference() {
    use avis_core::synth::{generate, perturb, PerturbKind, PerturbationOp, SceneSpec};
    let s = generate(&SceneSpec {
        seed: 21,
        videos: 2,
        instances_per_video: 2,
        categories: 3,
        ..SceneSpec::default()
    })
    .unwrap();
    let ops = [
        PerturbationOp::all(PerturbKind::Rescore),
        PerturbationOp::on(PerturbKind::FlipCategory, vec![2]),
    ];
    let hyps = perturb(&s.oracle, &ops, 4, &s.manifest).unwrap().hypotheses;
    assert_eq!(hyps.len(), 4);
    let config = EvalConfig::default();
    let fast = evaluate::<f64>(&s.manifest, &hyps, &config).unwrap();
    assert!(fast.ap.unwrap() < 100.0);
    assert_eq!(
        fast,
        reference_evaluate(&s.manifest, &hyps, &config).unwrap()
    );
}

#[test]
fn worker_count_does_not_change_report() {
    let s = common::scene(17);
    let hyps = common::degrade(&s, 17);
    let c = EvalConfig::default();
    let one = evaluate_with_workers::<f64>(&s.manifest, &hyps, &c, 1)
        .unwrap()
        .to_json();
    let eight = evaluate_with_workers::<f64>(&s.manifest, &hyps, &c, 8)
        .unwrap()
        .to_json();
    assert_eq!(one, eight);
}

#[test]
fn video_order_does_not_change_report() {
    let s = common::scene(18);
    let hyps = common::degrade(&s, 18);
    let mut doc = s.manifest.to_document();
    doc.videos.reverse();
    doc.annotations.reverse();
    let m2 = DatasetManifest::from_document(doc).unwrap();
    assert_eq!(
        eval(&s.manifest, &hyps).to_json(),
        eval(&m2, &hyps).to_json()
    );
}

#[test]
fn split_filter_and_scope_options() {
    for seed in [2, 5, 8] {
        let s = common::scene(seed);
        let hyps = common::degrade(&s, seed);
        for config in [
            EvalConfig {
                split: Some(avis_core::dataset::Split::Test),
                ..EvalConfig::default()
            },
            EvalConfig {
                ar_scope: ArScope::PerVideoCategory,
                ar_caps: vec![1, 2, 10],
                ..EvalConfig::default()
            },
            EvalConfig {
                iou_thresholds: vec![Threshold::new(3, 10), Threshold::new(7, 10)],
                recall_points: 11,
                ..EvalConfig::default()
            },
        ] {
            let fast = evaluate::<f64>(&s.manifest, &hyps, &config).unwrap();
            assert_eq!(
                fast,
                reference_evaluate(&s.manifest, &hyps, &config).unwrap()
            );
        }
    }
}

#[test]
fn missing_fixed_thresholds_are_absent() {
    let s = common::scene(0);
    let config = EvalConfig {
        iou_thresholds: vec![Threshold::new(6, 10)],
        ..EvalConfig::default()
    };
    let r = evaluate::<f64>(&s.manifest, &s.oracle, &config).unwrap();
    assert_eq!((r.ap, r.ap50, r.ap75), (Some(100.0), None, None));
    assert!(r.diagnostics.iter().any(|d| d.starts_with("AP50 absent")));
}

#[test]
fn categories_without_ground_truth_are_excluded() {
    let (m, h) = two_gt_fixture();
    let mut doc = m.to_document();
    doc.categories
        .push(avis_core::dataset::schema::CategoryRecord {
            id: 2,
            name: "cat".into(),
            scenario: "animal".into(),
        });
    let m2 = DatasetManifest::from_document(doc).unwrap();
    let mut h2 = h.clone();
    let mut stray = h[0].clone();
    stray.id = 3;
    stray.category_id = 2;
    h2.push(stray);
    let a = eval(&m, &h);
    let b = eval(&m2, &h2);
    assert_eq!(a.ap, b.ap);
    assert_eq!(b.per_category[1].ap, None);
    assert!(b
        .diagnostics
        .iter()
        .any(|d| d.contains("excluded from averages: 2")));
}

#[test]
fn explicit_empty_prediction_frames_equal_absent() {
    let (m, h) = two_gt_fixture();
    let mut h2 = h.clone();
    let e = FrameMask::empty(4, 4).unwrap();
    h2[1].track = MaskTrack::new(4, 4, vec![Some(e)]).unwrap();
    let mut h3 = h.clone();
    h3[1].track = MaskTrack::absent(4, 4, 1);
    assert_eq!(eval(&m, &h2), eval(&m, &h3));
}
