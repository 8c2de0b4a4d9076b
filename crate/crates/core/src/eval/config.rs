use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::Split;

/// IoU threshold as an exact decimal fraction.
pub type Threshold = Ratio<u64>;

/// How AR@k retains hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArScope {
    /// Top-k hypotheses per video, ranked across all categories.
    #[default]
    PerVideo,
    /// Top-k hypotheses per (video, category).
    PerVideoCategory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub iou_thresholds: Vec<Threshold>,
    pub recall_points: usize,
    pub ar_caps: Vec<usize>,
    /// Hypotheses scoring at or below the floor are dropped before matching.
    pub score_floor: Option<f64>,
    /// Restrict evaluation to videos of one split.
    pub split: Option<Split>,
    pub ar_scope: ArScope,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            iou_thresholds: (0..10).map(|i| Ratio::new(50 + 5 * i, 100)).collect(),
            recall_points: 101,
            ar_caps: vec![1, 10],
            score_floor: None,
            split: None,
            ar_scope: ArScope::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("IoU thresholds must be non-empty, strictly increasing, and within (0, 1]")]
    Thresholds,
    #[error("at least 2 recall points are required")]
    RecallPoints,
    #[error("AR caps must be positive")]
    ArCaps,
    #[error("score floor must lie in [0, 1]")]
    ScoreFloor,
    #[error("cannot parse {0:?} as a decimal in [0, 1]")]
    Decimal(String),
    #[error("threshold range must look like start:stop:step, got {0:?}")]
    Range(String),
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let zero = Ratio::from_integer(0);
        let one = Ratio::from_integer(1);
        let in_range = self.iou_thresholds.iter().all(|t| *t > zero && *t <= one);
        let increasing = self.iou_thresholds.windows(2).all(|w| w[0] < w[1]);
        if self.iou_thresholds.is_empty() || !in_range || !increasing {
            return Err(ConfigError::Thresholds);
        }
        if self.recall_points < 2 {
            return Err(ConfigError::RecallPoints);
        }
        if self.ar_caps.contains(&0) {
            return Err(ConfigError::ArCaps);
        }
        if let Some(f) = self.score_floor {
            if !(0.0..=1.0).contains(&f) {
                return Err(ConfigError::ScoreFloor);
            }
        }
        Ok(())
    }

    pub(crate) fn threshold_index(&self, t: Threshold) -> Option<usize> {
        self.iou_thresholds.iter().position(|&x| x == t)
    }
}

/// Parses a decimal such as `0.55` into an exact fraction.
pub fn parse_decimal(s: &str) -> Result<Threshold, ConfigError> {
    let err = || ConfigError::Decimal(s.to_owned());
    let s = s.trim();
    let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    let digits = |d: &str| d.chars().all(|c| c.is_ascii_digit());
    if !digits(whole) || !digits(frac) || frac.len() > 9 {
        return Err(err());
    }
    let whole: u64 = if whole.is_empty() {
        0
    } else {
        whole.parse().map_err(|_| err())?
    };
    let denom = 10u64.pow(frac.len() as u32);
    let frac: u64 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| err())?
    };
    let value = Ratio::new(whole * denom + frac, denom);
    if value > Ratio::from_integer(1) {
        return Err(err());
    }
    Ok(value)
}

/// Parses `start:stop:step` into the inclusive arithmetic sequence.
pub fn parse_threshold_range(s: &str) -> Result<Vec<Threshold>, ConfigError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(ConfigError::Range(s.to_owned()));
    };
    let (start, stop, step) = (
        parse_decimal(start)?,
        parse_decimal(stop)?,
        parse_decimal(step)?,
    );
    if step == Ratio::from_integer(0) || stop < start {
        return Err(ConfigError::Range(s.to_owned()));
    }
    let mut out = Vec::new();
    let mut t = start;
    while t <= stop {
        out.push(t);
        t += step;
    }
    Ok(out)
}

/// Configuration as echoed in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub iou_thresholds: Vec<f64>,
    pub recall_points: usize,
    pub ar_caps: Vec<usize>,
    pub score_floor: Option<f64>,
    pub split: Option<Split>,
    pub ar_scope: ArScope,
}

impl From<&EvalConfig> for ConfigEcho {
    fn from(c: &EvalConfig) -> Self {
        ConfigEcho {
            iou_thresholds: c
                .iou_thresholds
                .iter()
                .map(|t| *t.numer() as f64 / *t.denom() as f64)
                .collect(),
            recall_points: c.recall_points,
            ar_caps: c.ar_caps.clone(),
            score_floor: c.score_floor,
            split: c.split,
            ar_scope: c.ar_scope,
        }
    }
}
