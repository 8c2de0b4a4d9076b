//! Evaluation and dataset toolkit for audio-visual instance segmentation.
//!
//! * [`mask`]: run-length masks, tracks, and the spatiotemporal IoU kernel.
//! * [`dataset`]: ground-truth/prediction documents, validation, statistics,
//!   and conversion to saliency and semantic targets.
//! * [`eval`]: greedy matching, interpolated precision-recall, AP/AR reports.
//! * [`synth`]: seeded synthetic scenes, prediction perturbations, and a
//!   brute-force reference evaluator.
//!
//! Metric kernels are generic over [`Scalar`]; [`Exact`] gives rational
//! arithmetic with no rounding at all.

pub mod dataset;
pub mod eval;
pub mod mask;
pub mod scalar;
pub mod synth;

pub use dataset::{load_ground_truth, load_predictions, DatasetManifest, Hypothesis};
pub use eval::{evaluate, EvalConfig, MetricsReport};
pub use scalar::{Exact, Scalar};

/// Per-hypothesis match outcome in double precision.
pub type MatchEntryF64 = eval::MatchEntry<f64>;
/// Per-hypothesis match outcome in exact arithmetic.
pub type ExactMatchEntry = eval::MatchEntry<Exact>;
pub type UnitMatchesF64 = eval::UnitMatches<f64>;
pub type ExactUnitMatches = eval::UnitMatches<Exact>;
