use std::fmt::Write;

use serde::Serialize;

use super::config::ConfigEcho;

/// Matching and averaging conventions, stated in every report.
pub const PROTOCOL: &str = "greedy matching per (video, category): hypotheses by descending score \
(ties: ascending hypothesis id) each take the unmatched ground-truth track of highest spatiotemporal \
IoU >= threshold (ties: ascending track id); AP: right-max interpolated precision averaged over \
recall points, then over categories with ground truth, then over IoU thresholds; AR@k: recall with \
the top-k hypotheses retained, averaged over categories and IoU thresholds";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalCounts {
    pub videos: usize,
    pub annotated_videos: usize,
    pub instances: usize,
    pub hypotheses: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallAtCap {
    pub cap: usize,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryMetrics {
    pub category_id: u32,
    pub name: String,
    pub instances: usize,
    /// Absent for categories with no ground truth in scope.
    pub ap: Option<f64>,
}

/// Evaluation result. Metric values are percentages rounded to
/// [`REPORT_DECIMALS`] places.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub protocol: String,
    pub config: ConfigEcho,
    pub counts: EvalCounts,
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    pub ar: Vec<RecallAtCap>,
    pub per_category: Vec<CategoryMetrics>,
    pub diagnostics: Vec<String>,
}

pub const REPORT_DECIMALS: i32 = 6;

/// Fraction in `[0, 1]` to a rounded percentage.
pub fn to_percent(fraction: f64) -> f64 {
    let scale = 10f64.powi(REPORT_DECIMALS);
    (fraction * 100.0 * scale).round() / scale
}

/// Notes attached to every report, derived from what was in scope.
pub fn standard_diagnostics(
    annotated_videos: usize,
    excluded_categories: &[u32],
    config: &super::EvalConfig,
) -> Vec<String> {
    let mut out = Vec::new();
    if annotated_videos == 0 {
        out.push("no annotated videos in evaluation scope; all metrics absent".to_owned());
    }
    if !excluded_categories.is_empty() {
        let ids: Vec<String> = excluded_categories.iter().map(u32::to_string).collect();
        out.push(format!(
            "categories without ground truth excluded from averages: {}",
            ids.join(", ")
        ));
    }
    for (label, t) in [("AP50", (1, 2)), ("AP75", (3, 4))] {
        if config
            .threshold_index(super::Threshold::new(t.0, t.1))
            .is_none()
        {
            out.push(format!("{label} absent: threshold not configured"));
        }
    }
    out
}

/// The five headline numbers of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Headline {
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    pub ar1: Option<f64>,
    pub ar10: Option<f64>,
}

impl MetricsReport {
    pub fn recall_at(&self, cap: usize) -> Option<f64> {
        self.ar.iter().find(|r| r.cap == cap).and_then(|r| r.value)
    }

    pub fn headline(&self) -> Headline {
        Headline {
            ap: self.ap,
            ap50: self.ap50,
            ap75: self.ap75,
            ar1: self.recall_at(1),
            ar10: self.recall_at(10),
        }
    }

    /// Pretty JSON with a trailing newline; byte-stable.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Renders rows as a fixed-width table: `| name | AP | AP50 | AP75 | AR1 | AR10 |`.
pub fn render_table(rows: &[(&str, Headline)]) -> String {
    let label_width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(5);
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |v| format!("{v:.1}"));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<label_width$} | {:>5} | {:>5} | {:>5} | {:>5} | {:>5}",
        "", "AP", "AP50", "AP75", "AR1", "AR10"
    );
    let _ = writeln!(out, "{}", "-".repeat(label_width + 40));
    for (name, h) in rows {
        let _ = writeln!(
            out,
            "{:<label_width$} | {:>5} | {:>5} | {:>5} | {:>5} | {:>5}",
            name,
            cell(h.ap),
            cell(h.ap50),
            cell(h.ap75),
            cell(h.ar1),
            cell(h.ar10)
        );
    }
    out
}
