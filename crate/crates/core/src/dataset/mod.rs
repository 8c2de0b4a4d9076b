//! Ground-truth and prediction documents: loading, validation, statistics,
//! and derived saliency/semantic targets.

mod convert;
mod load;
mod model;
pub mod schema;
mod stats;

pub use convert::{to_avsd, to_avss, LabelMap};
pub use load::{hypotheses_to_records, load_ground_truth, load_predictions, predictions_to_json};
pub use model::{
    CategoryDef, DatasetManifest, Hypothesis, InstanceTrack, Scenario, Split, VideoMeta,
};
pub use stats::{compute_stats, CategoryFrequency, DatasetStats, ScenarioIncidence};

use serde::Serialize;
use thiserror::Error;

use crate::mask::MaskError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    Syntax,
    Schema,
    Referential,
    Geometry,
    Value,
}

/// One problem found in a document. `path` locates the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = serde_json::to_value(self.kind).expect("enum serializes");
        write!(
            f,
            "{} violation at {}: {}",
            kind.as_str().unwrap_or("?"),
            self.path,
            self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("{} violation(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
}

impl LoadError {
    /// Flattens the error into a violation list for reporting.
    pub fn violations(&self) -> Vec<Violation> {
        match self {
            LoadError::Syntax {
                line,
                column,
                message,
            } => vec![Violation {
                kind: ViolationKind::Syntax,
                path: format!("line {line}, column {column}"),
                message: message.clone(),
            }],
            LoadError::Schema { path, message } => vec![Violation {
                kind: ViolationKind::Schema,
                path: path.clone(),
                message: message.clone(),
            }],
            LoadError::Invalid(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("unknown video id {0}")]
    UnknownVideo(u64),
    #[error(transparent)]
    Mask(#[from] MaskError),
}
