#![allow(dead_code)]

use avis_core::synth::{
    generate, perturb, PerturbKind, PerturbationOp, SceneSpec, ShapeFamily, SyntheticScene, Target,
};
use avis_core::Hypothesis;

/// Desk-scale scene: up to 6 instances, 20 frames, 64x64.
pub fn desk_spec(seed: u64) -> SceneSpec {
    SceneSpec {
        seed,
        videos: 2 + (seed % 4) as usize,
        frames: 6 + (seed % 15) as usize,
        height: 64,
        width: 64,
        instances_per_video: 1 + (seed % 6) as usize,
        categories: 2 + (seed % 3) as usize,
        interval_min: 1,
        interval_max: 6 + (seed % 15) as usize,
        shape: if seed.is_multiple_of(2) {
            ShapeFamily::Rectangle
        } else {
            ShapeFamily::Ellipse
        },
        train_videos: (seed % 3) as usize,
        force_overlap: seed.is_multiple_of(5),
    }
}

/// A degraded prediction set: distinct scores, partial geometric damage,
/// a category flip, drops, and duplicates.
pub fn degrade(scene: &SyntheticScene, seed: u64) -> Vec<Hypothesis> {
    let ops = vec![
        PerturbationOp::all(PerturbKind::Rescore),
        PerturbationOp {
            kind: PerturbKind::Shift { dx: 2, dy: 1 },
            target: Target::Fraction(0.4),
        },
        PerturbationOp {
            kind: PerturbKind::Dilate { radius: 1 },
            target: Target::Fraction(0.3),
        },
        PerturbationOp {
            kind: PerturbKind::TruncateInterval { frames: 2 },
            target: Target::Fraction(0.3),
        },
        PerturbationOp {
            kind: PerturbKind::FlipCategory,
            target: Target::Fraction(0.2),
        },
        PerturbationOp {
            kind: PerturbKind::Duplicate,
            target: Target::Fraction(0.2),
        },
        PerturbationOp {
            kind: PerturbKind::Drop,
            target: Target::Fraction(0.15),
        },
        PerturbationOp {
            kind: PerturbKind::Rescore,
            target: Target::Fraction(0.5),
        },
    ];
    perturb(&scene.oracle, &ops, seed, &scene.manifest)
        .expect("ops are valid")
        .hypotheses
}

pub fn scene(seed: u64) -> SyntheticScene {
    generate(&desk_spec(seed)).expect("desk spec is feasible")
}
