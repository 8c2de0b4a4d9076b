//! `avis`: validate, summarize, evaluate, convert, and synthesize
//! audio-visual instance segmentation data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use avis_core::dataset::schema::RleRecord;
use avis_core::dataset::{compute_stats, to_avsd, to_avss, Split, Violation};
use avis_core::eval::{
    evaluate_with_workers, parse_decimal, parse_threshold_range, render_table, ArScope, EvalConfig,
};
use avis_core::mask::FrameMask;
use avis_core::synth::{generate, perturb, PerturbationOp, SceneSpec};
use avis_core::{load_ground_truth, load_predictions, DatasetManifest, Exact, Hypothesis};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "avis",
    version,
    about = "Audio-visual instance segmentation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a ground-truth document and, optionally, predictions against it.
    Validate {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: Option<PathBuf>,
    },
    /// Print dataset statistics as JSON.
    Stats {
        #[arg(long)]
        gt: PathBuf,
    },
    /// Score predictions against ground truth.
    Eval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// IoU thresholds as start:stop:step, stop inclusive.
        #[arg(long, default_value = "0.5:0.95:0.05")]
        thresholds: String,
        #[arg(long, value_delimiter = ',', default_value = "1,10")]
        ar_caps: Vec<usize>,
        /// Keep only hypotheses scoring strictly above this value.
        #[arg(long)]
        score_floor: Option<f64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum)]
        split: Option<SplitArg>,
        #[arg(long, value_enum, default_value_t = ScopeArg::PerVideo)]
        ar_scope: ScopeArg,
        /// Evaluate in exact rational arithmetic instead of f64.
        #[arg(long)]
        exact: bool,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Row label for the printed table.
        #[arg(long, default_value = "predictions")]
        label: String,
    },
    /// Write per-frame masks of one video for a single-label task.
    Convert {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        video: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic ground truth and prediction pair.
    Synth {
        /// Overrides the seed in the spec document.
        #[arg(long)]
        seed: Option<u64>,
        /// Scene spec JSON; an optional `perturbations` array degrades the oracle.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Task {
    Avsd,
    Avss,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    PerVideo,
    PerVideoCategory,
}

enum Failure {
    /// Exit 1, with the violations already reported.
    Invalid,
    /// Exit 2.
    Usage(String),
    /// Exit 3.
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid => 1,
            Failure::Usage(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Validate { gt, pred } => cmd_validate(&gt, pred.as_deref()),
        Command::Stats { gt } => cmd_stats(&gt),
        Command::Eval {
            gt,
            pred,
            thresholds,
            ar_caps,
            score_floor,
            workers,
            split,
            ar_scope,
            exact,
            out,
            label,
        } => parse_config(&thresholds, ar_caps, score_floor, split, ar_scope).and_then(|config| {
            cmd_eval(&gt, &pred, &config, workers, exact, out.as_deref(), &label)
        }),
        Command::Convert {
            gt,
            task,
            video,
            out,
        } => cmd_convert(&gt, task, video, &out),
        Command::Synth { seed, spec, out } => cmd_synth(seed, spec.as_deref(), &out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid => {}
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Internal(m) => eprintln!("internal error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Outcome {
    fs::create_dir_all(path)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

fn report_violations(label: &str, violations: &[Violation]) {
    for v in violations {
        eprintln!("{label}: {v}");
    }
}

fn load_valid_gt(path: &Path) -> Result<DatasetManifest, Failure> {
    load_ground_truth(&read(path)?).map_err(|e| {
        report_violations("ground truth", &e.violations());
        Failure::Invalid
    })
}

fn cmd_validate(gt: &Path, pred: Option<&Path>) -> Outcome {
    let gt_text = read(gt)?;
    let pred_text = pred.map(read).transpose()?;
    let (gt_violations, manifest) = match load_ground_truth(&gt_text) {
        Ok(m) => (Vec::new(), Some(m)),
        Err(e) => (e.violations(), None),
    };
    // Predictions can only be checked against a usable manifest.
    let pred_violations = match (&pred_text, &manifest) {
        (Some(text), Some(m)) => Some(
            load_predictions(text, m)
                .err()
                .map(|e| e.violations())
                .unwrap_or_default(),
        ),
        _ => None,
    };
    let failed =
        !gt_violations.is_empty() || pred_violations.as_ref().is_some_and(|v| !v.is_empty());
    let report = json!({
        "valid": !failed,
        "ground_truth": gt_violations,
        "predictions": pred_violations,
        "predictions_checked": pred_violations.is_some(),
    });
    print!("{}", pretty(&report));
    if failed {
        Err(Failure::Invalid)
    } else {
        Ok(())
    }
}

fn cmd_stats(gt: &Path) -> Outcome {
    let manifest = load_valid_gt(gt)?;
    let stats = serde_json::to_string_pretty(&compute_stats(&manifest)).expect("stats serialize");
    println!("{stats}");
    Ok(())
}

fn parse_config(
    thresholds: &str,
    ar_caps: Vec<usize>,
    score_floor: Option<f64>,
    split: Option<SplitArg>,
    scope: ScopeArg,
) -> Result<EvalConfig, Failure> {
    let usage = |e: avis_core::eval::ConfigError| Failure::Usage(e.to_string());
    // A bare decimal is a single threshold.
    let iou_thresholds = if thresholds.contains(':') {
        parse_threshold_range(thresholds).map_err(usage)?
    } else {
        vec![parse_decimal(thresholds).map_err(usage)?]
    };
    let config = EvalConfig {
        iou_thresholds,
        ar_caps,
        score_floor,
        split: split.map(|s| match s {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        }),
        ar_scope: match scope {
            ScopeArg::PerVideo => ArScope::PerVideo,
            ScopeArg::PerVideoCategory => ArScope::PerVideoCategory,
        },
        ..EvalConfig::default()
    };
    config.validate().map_err(usage)?;
    Ok(config)
}

fn cmd_eval(
    gt: &Path,
    pred: &Path,
    config: &EvalConfig,
    workers: usize,
    exact: bool,
    out: Option<&Path>,
    label: &str,
) -> Outcome {
    let manifest = load_valid_gt(gt)?;
    let hyps = load_predictions(&read(pred)?, &manifest).map_err(|e| {
        report_violations("predictions", &e.violations());
        Failure::Invalid
    })?;
    let report = if exact {
        evaluate_with_workers::<Exact>(&manifest, &hyps, config, workers)
    } else {
        evaluate_with_workers::<f64>(&manifest, &hyps, config, workers)
    }
    .map_err(|e| Failure::Internal(e.to_string()))?;
    for d in &report.diagnostics {
        eprintln!("note: {d}");
    }
    match out {
        Some(path) => write(path, &report.to_json())?,
        None => print!("{}", report.to_json()),
    }
    print!("{}", render_table(&[(label, report.headline())]));
    Ok(())
}

fn rle(mask: &FrameMask) -> RleRecord {
    RleRecord {
        size: [mask.height(), mask.width()],
        counts: mask.counts().to_vec(),
    }
}

fn cmd_convert(gt: &Path, task: Task, video: u64, out: &Path) -> Outcome {
    let manifest = load_valid_gt(gt)?;
    if manifest.video(video).is_none() {
        return Err(Failure::Usage(format!("video {video} does not exist")));
    }
    let internal = |e: avis_core::dataset::DatasetError| Failure::Internal(e.to_string());
    let docs: Vec<Value> = match task {
        Task::Avsd => to_avsd(&manifest, video)
            .map_err(internal)?
            .iter()
            .enumerate()
            .map(|(t, m)| json!({"video_id": video, "frame": t, "task": "avsd", "mask": rle(m)}))
            .collect(),
        Task::Avss => to_avss(&manifest, video)
            .map_err(internal)?
            .iter()
            .enumerate()
            .map(|(t, labels)| {
                let masks: Vec<Value> = labels
                    .category_masks()
                    .iter()
                    .map(|(c, m)| json!({"category_id": c, "mask": rle(m)}))
                    .collect();
                json!({
                    "video_id": video,
                    "frame": t,
                    "task": "avss",
                    "size": [labels.height(), labels.width()],
                    "categories": masks,
                })
            })
            .collect(),
    };
    create_dir(out)?;
    for (t, doc) in docs.iter().enumerate() {
        write(&out.join(format!("frame_{t:05}.json")), &pretty(doc))?;
    }
    println!("wrote {} frame documents to {}", docs.len(), out.display());
    Ok(())
}

fn parse_synth_spec(text: &str) -> Result<(SceneSpec, Vec<PerturbationOp>), Failure> {
    let bad = |e: serde_json::Error| Failure::Usage(format!("invalid synth spec: {e}"));
    let mut value: Value = serde_json::from_str(text).map_err(bad)?;
    let ops = match value
        .as_object_mut()
        .and_then(|o| o.remove("perturbations"))
    {
        Some(ops) => serde_json::from_value(ops).map_err(bad)?,
        None => Vec::new(),
    };
    Ok((serde_json::from_value(value).map_err(bad)?, ops))
}

fn cmd_synth(seed: Option<u64>, spec: Option<&Path>, out: &Path) -> Outcome {
    let (mut scene_spec, ops) = match spec {
        Some(path) => parse_synth_spec(&read(path)?)?,
        None => (SceneSpec::default(), Vec::new()),
    };
    if let Some(seed) = seed {
        scene_spec.seed = seed;
    }
    let scene = generate(&scene_spec).map_err(|e| Failure::Usage(e.to_string()))?;
    let hyps: Vec<Hypothesis> = if ops.is_empty() {
        scene.oracle.clone()
    } else {
        let perturbed = perturb(&scene.oracle, &ops, scene_spec.seed, &scene.manifest)
            .map_err(|e| Failure::Usage(e.to_string()))?;
        for w in &perturbed.warnings {
            eprintln!("warning: {w}");
        }
        perturbed.hypotheses
    };
    create_dir(out)?;
    write(&out.join("ground_truth.json"), &scene.ground_truth_json())?;
    write(
        &out.join("predictions.json"),
        &avis_core::dataset::predictions_to_json(&hyps),
    )?;
    println!(
        "wrote {} tracks and {} predictions to {}",
        scene.manifest.tracks().len(),
        hyps.len(),
        out.display()
    );
    Ok(())
}
