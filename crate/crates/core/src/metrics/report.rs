use std::fmt::Write as _;

use serde::Serialize;

use super::{paired_compare, MetricsError, PairedTest};

pub const COHENS_D_NOTE: &str = "Cohen's d uses the pooled SD of the two conditions, sqrt((s_a^2 + s_b^2) / 2)";
pub const STRIDE_WIDTH_NOTE: &str =
    "stride width is the lateral distance between a heel strike and the contralateral heel strike inside the stride";

/// One metric compared across two paired conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub metric: String,
    #[serde(flatten)]
    pub test: PairedTest,
    /// mean_a / mean_b
    pub ratio: Option<f64>,
    /// 100 (mean_a - mean_b) / mean_b
    pub percent_change: Option<f64>,
    pub significant: bool,
}

impl ComparisonRow {
    pub fn compute(metric: &str, a: &[f64], b: &[f64]) -> Result<Self, MetricsError> {
        let test = paired_compare(a, b)?;
        let (ratio, percent_change) = if test.mean_b != 0.0 {
            (
                Some(test.mean_a / test.mean_b),
                Some(100.0 * (test.mean_a - test.mean_b) / test.mean_b),
            )
        } else {
            (None, None)
        };
        Ok(ComparisonRow {
            metric: metric.to_string(),
            significant: test.p < 0.05,
            test,
            ratio,
            percent_change,
        })
    }
}

/// Paired comparison of condition `a` against condition `b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub label_a: String,
    pub label_b: String,
    pub participants: Vec<String>,
    /// Participants present under only one condition.
    pub excluded: Vec<String>,
    pub rows: Vec<ComparisonRow>,
    /// Metrics that could not be compared, with the reason.
    pub skipped: Vec<(String, String)>,
    pub notes: Vec<String>,
}

impl ComparisonReport {
    pub fn new(label_a: &str, label_b: &str, participants: Vec<String>, excluded: Vec<String>) -> Self {
        ComparisonReport {
            label_a: label_a.to_string(),
            label_b: label_b.to_string(),
            participants,
            excluded,
            rows: Vec::new(),
            skipped: Vec::new(),
            notes: vec![COHENS_D_NOTE.to_string(), STRIDE_WIDTH_NOTE.to_string()],
        }
    }

    /// Add a metric; a statistical failure is recorded in `skipped`.
    pub fn push_metric(&mut self, metric: &str, a: &[f64], b: &[f64]) {
        match ComparisonRow::compute(metric, a, b) {
            Ok(row) => self.rows.push(row),
            Err(e) => self.skipped.push((metric.to_string(), e.to_string())),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for note in &self.notes {
            let _ = writeln!(out, "# {note}");
        }
        let _ = writeln!(out, "# a={} b={}", self.label_a, self.label_b);
        out.push_str("metric,n,mean_a,sd_a,mean_b,sd_b,mean_diff,t,dof,p,cohens_d,ratio,percent_change,significant\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let t = &r.test;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.metric,
                t.n,
                t.mean_a,
                t.sd_a,
                t.mean_b,
                t.sd_b,
                t.mean_diff,
                t.t,
                t.dof,
                t.p,
                t.cohens_d,
                opt(r.ratio),
                opt(r.percent_change),
                if r.significant { "*" } else { "" }
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
