//! Synthetic scenes, prediction perturbations, and the reference evaluator
//! used as a test oracle.

mod perturb;
mod reference;
mod scene;

pub use perturb::{perturb, PerturbKind, PerturbationOp, Perturbed, Target};
pub use reference::{reference_evaluate, MAX_INSTANCES_PER_VIDEO, MAX_VIDEOS};
pub use scene::{generate, rasterize, Placement, SceneSpec, ShapeFamily, SyntheticScene};

use thiserror::Error;

use crate::dataset::Violation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("infeasible scene spec: {0}")]
    Infeasible(String),
    #[error("generated document failed validation: {0:?}")]
    Schema(Vec<Violation>),
    #[error("invalid perturbation: {0}")]
    BadOp(String),
    #[error("input too large for the reference evaluator: {0}")]
    TooLarge(String),
}
