//! Scalar gait outcomes: stride parameters, peak angles, knee stiffness and
//! paired terrain statistics.

mod report;
mod stats;
mod stiffness;
mod stride;

use thiserror::Error;

pub use report::{ComparisonReport, ComparisonRow, COHENS_D_NOTE, STRIDE_WIDTH_NOTE};
pub use stats::{paired_compare, sample_mean, sample_sd, PairedTest};
pub use stiffness::{knee_stiffness, ols_fit, FitOutcome, LinearFit, StiffnessFit, StiffnessResult};
pub use stride::{peak_angles, stride_metrics, PeakAngles, StrideInputs, StrideMetrics};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("fit failed for {segment}: {reason}")]
    Fit { segment: String, reason: String },
    #[error("{0}")]
    Parameter(String),
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),
}
