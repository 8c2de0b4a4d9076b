use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn avis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avis"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

fn synth(dir: &Path, seed: u64, spec: Option<&str>) {
    let seed = seed.to_string();
    let out = dir.to_str().unwrap();
    let mut args = vec!["synth", "--seed", &seed, "--out", out];
    let spec_path = path(dir, "spec.json");
    if let Some(spec) = spec {
        fs::create_dir_all(dir).unwrap();
        fs::write(&spec_path, spec).unwrap();
        args.extend(["--spec", &spec_path]);
    }
    let o = avis(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn synthetic_pair_validates() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), 3, None);
    let o = avis(&[
        "validate",
        "--gt",
        &path(dir.path(), "ground_truth.json"),
        "--pred",
        &path(dir.path(), "predictions.json"),
    ]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["valid"], true);
    assert_eq!(report["ground_truth"].as_array().unwrap().len(), 0);
}

#[test]
fn dangling_video_id_is_one_violation() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), 3, None);
    let gt = path(dir.path(), "ground_truth.json");
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&gt).unwrap()).unwrap();
    doc["annotations"][0]["video_id"] = 99.into();
    fs::write(&gt, doc.to_string()).unwrap();
    let o = avis(&["validate", "--gt", &gt]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let violations = report["ground_truth"].as_array().unwrap();
    assert_eq!(violations.len(), 1);
    assert_eq!(violations[0]["path"], "annotations[0].video_id");
    assert_eq!(violations[0]["kind"], "referential");
}

#[test]
fn every_prediction_violation_is_reported() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), 3, None);
    let pred = path(dir.path(), "predictions.json");
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&pred).unwrap()).unwrap();
    doc[0]["score"] = 1.5.into();
    doc[1]["category_id"] = 40.into();
    fs::write(&pred, doc.to_string()).unwrap();
    let o = avis(&[
        "validate",
        "--gt",
        &path(dir.path(), "ground_truth.json"),
        "--pred",
        &pred,
    ]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["predictions"].as_array().unwrap().len(), 2);
}

#[test]
fn unreadable_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let missing = path(dir.path(), "missing.json");
    assert_eq!(code(&avis(&["validate", "--gt", &missing])), 2);
    assert_eq!(code(&avis(&["stats", "--gt", &missing])), 2);
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(code(&avis(&["eval", "--gt", "x"])), 2);
    assert_eq!(code(&avis(&["frobnicate"])), 2);
    let dir = TempDir::new().unwrap();
    synth(dir.path(), 1, None);
    let gt = path(dir.path(), "ground_truth.json");
    let pred = path(dir.path(), "predictions.json");
    let bad = avis(&[
        "eval",
        "--gt",
        &gt,
        "--pred",
        &pred,
        "--thresholds",
        "0.9:0.5:0.05",
    ]);
    assert_eq!(code(&bad), 2);
    let bad = avis(&["eval", "--gt", &gt, "--pred", &pred, "--score-floor", "2"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn syntax_error_is_a_validation_failure() {
    let dir = TempDir::new().unwrap();
    let gt = path(dir.path(), "gt.json");
    fs::write(&gt, "{\"videos\": [").unwrap();
    let o = avis(&["validate", "--gt", &gt]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["ground_truth"][0]["kind"], "syntax");
}

#[test]
fn oracle_predictions_print_100() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), 5, None);
    let report = path(dir.path(), "report.json");
    let o = avis(&[
        "eval",
        "--gt",
        &path(dir.path(), "ground_truth.json"),
        "--pred",
        &path(dir.path(), "predictions.json"),
        "--out",
        &report,
        "--label",
        "oracle",
    ]);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8(o.stdout).unwrap();
    let row = table.lines().last().unwrap();
    assert!(row.starts_with("oracle | 100.0 | 100.0 | 100.0 |"), "{row}");
    let doc: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["ap"], 100.0);
}

#[test]
fn invalid_predictions_stop_eval_with_exit_1() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), 5, None);
    let pred = path(dir.path(), "predictions.json");
    fs::write(&pred, "[{\"video_id\": 1}]").unwrap();
    let o = avis(&[
        "eval",
        "--gt",
        &path(dir.path(), "ground_truth.json"),
        "--pred",
        &pred,
    ]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
}

#[test]
fn score_floor_drops_hypotheses_before_matching() {
    let spec = r#"{"videos": 2, "instances_per_video": 3, "frames": 6,
        "perturbations": [{"kind": "rescore"}]}"#;
    let dir = TempDir::new().unwrap();
    synth(dir.path(), 11, Some(spec));
    let run = |floor: Option<&str>| {
        let mut args = vec![
            "eval".to_owned(),
            "--gt".into(),
            path(dir.path(), "ground_truth.json"),
            "--pred".into(),
            path(dir.path(), "predictions.json"),
        ];
        if let Some(f) = floor {
            args.extend(["--score-floor".into(), f.into()]);
        }
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = avis(&args);
        assert_eq!(code(&o), 0);
        let text = String::from_utf8(o.stdout).unwrap();
        let json_end = text.rfind("}\n").unwrap() + 2;
        serde_json::from_str::<Value>(&text[..json_end]).unwrap()
    };
    let all = run(None);
    let floored = run(Some("0.5"));
    assert_eq!(all["counts"]["hypotheses"], 6);
    // Rescored grid is {1/7, ..., 6/7}; three lie above 0.5.
    assert_eq!(floored["counts"]["hypotheses"], 3);
    assert!(floored["ar"][1]["value"].as_f64() < all["ar"][1]["value"].as_f64());
}

#[test]
fn exact_and_float_reports_match() {
    let spec = r#"{"videos": 3, "instances_per_video": 4, "frames": 8, "height": 32, "width": 32,
        "perturbations": [
            {"kind": "rescore"},
            {"kind": "shift", "dx": 2, "dy": 1, "target": {"fraction": 0.5}},
            {"kind": "drop", "target": {"ids": [0]}}
        ]}"#;
    let dir = TempDir::new().unwrap();
    synth(dir.path(), 2, Some(spec));
    let gt = path(dir.path(), "ground_truth.json");
    let pred = path(dir.path(), "predictions.json");
    let f = path(dir.path(), "f.json");
    let e = path(dir.path(), "e.json");
    assert_eq!(
        code(&avis(&["eval", "--gt", &gt, "--pred", &pred, "--out", &f])),
        0
    );
    assert_eq!(
        code(&avis(&[
            "eval", "--gt", &gt, "--pred", &pred, "--out", &e, "--exact"
        ])),
        0
    );
    assert_eq!(fs::read(&f).unwrap(), fs::read(&e).unwrap());
}

#[test]
fn synth_is_byte_reproducible() {
    let spec = r#"{"shape": "ellipse", "perturbations": [{"kind": "score_noise", "sigma": 0.1}]}"#;
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    synth(a.path(), 7, Some(spec));
    synth(b.path(), 7, Some(spec));
    for name in ["ground_truth.json", "predictions.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn synth_rejects_unknown_spec_fields() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("spec.json"), r#"{"vidoes": 3}"#).unwrap();
    let o = avis(&[
        "synth",
        "--spec",
        &path(dir.path(), "spec.json"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn stats_match_spec_bookkeeping() {
    let spec = r#"{"videos": 4, "frames": 7, "instances_per_video": 3, "train_videos": 3}"#;
    let dir = TempDir::new().unwrap();
    synth(dir.path(), 9, Some(spec));
    let o = avis(&["stats", "--gt", &path(dir.path(), "ground_truth.json")]);
    assert_eq!(code(&o), 0);
    let stats: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stats["videos"], 4);
    assert_eq!(stats["train_videos"], 3);
    assert_eq!(stats["test_videos"], 1);
    assert_eq!(stats["frames"], 28);
    assert_eq!(stats["tracks"], 12);
    assert_eq!(stats["mean_duration_seconds"], 7.0);
}

#[test]
fn avsd_of_single_instance_video_is_that_track() {
    let spec = r#"{"videos": 1, "instances_per_video": 1, "frames": 6}"#;
    let dir = TempDir::new().unwrap();
    synth(dir.path(), 4, Some(spec));
    let gt_path = path(dir.path(), "ground_truth.json");
    let out = dir.path().join("avsd");
    let o = avis(&[
        "convert",
        "--gt",
        &gt_path,
        "--task",
        "avsd",
        "--video",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let gt: Value = serde_json::from_str(&fs::read_to_string(&gt_path).unwrap()).unwrap();
    let segs = gt["annotations"][0]["segmentations"].as_array().unwrap();
    for (t, seg) in segs.iter().enumerate() {
        let frame: Value = serde_json::from_str(
            &fs::read_to_string(out.join(format!("frame_{t:05}.json"))).unwrap(),
        )
        .unwrap();
        if seg.is_null() {
            assert_eq!(frame["mask"]["counts"], serde_json::json!([256]));
        } else {
            assert_eq!(&frame["mask"], seg, "frame {t}");
        }
    }
}

#[test]
fn convert_unknown_video_exits_2() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), 4, None);
    let o = avis(&[
        "convert",
        "--gt",
        &path(dir.path(), "ground_truth.json"),
        "--task",
        "avss",
        "--video",
        "77",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn commands_are_idempotent() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), 8, None);
    let gt = path(dir.path(), "ground_truth.json");
    let pred = path(dir.path(), "predictions.json");
    for args in [
        vec!["stats", "--gt", &gt],
        vec!["validate", "--gt", &gt, "--pred", &pred],
        vec!["eval", "--gt", &gt, "--pred", &pred],
    ] {
        assert_eq!(avis(&args).stdout, avis(&args).stdout, "{args:?}");
    }
}
