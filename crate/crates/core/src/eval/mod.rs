//! AP/AR evaluation of predicted tracks against ground truth.

mod config;
mod evaluate;
mod matching;
mod pr;
mod report;

pub use config::{
    parse_decimal, parse_threshold_range, ArScope, ConfigEcho, ConfigError, EvalConfig, Threshold,
};
pub use evaluate::{evaluate, evaluate_with_workers, match_all, UnitMatches};
pub use matching::{greedy_match, rank_order, MatchEntry};
pub use pr::{average_precision, pr_curve};
pub use report::{
    render_table, standard_diagnostics, to_percent, CategoryMetrics, EvalCounts, Headline,
    MetricsReport, RecallAtCap, PROTOCOL, REPORT_DECIMALS,
};

use thiserror::Error;

use crate::mask::MaskError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error("hypothesis id {0} appears more than once")]
    DuplicateHypothesis(usize),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}
