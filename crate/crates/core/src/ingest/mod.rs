//! Trial file parsing, marker-schema validation, gap repair and stream alignment.
//!
//! A trial is a marker table (nominally 100 Hz), a force-plate table
//! (nominally 1000 Hz) and a small TOML metadata file. See [`parse_trial`]
//! and [`align_streams`].

mod align;
mod gaps;
mod grf;
mod markers;
mod meta;
mod schema;

use thiserror::Error;

pub use align::{align_streams, decimation_factor, AlignedTrial};
pub use gaps::{fill_gaps, DEFAULT_MAX_GAP};
pub use grf::{parse_grf, read_grf, write_grf, GrfSample};
pub use markers::{parse_markers, read_markers, write_markers, MarkerFrame, MarkerSeries};
pub use meta::{load_trial, parse_trial, TrialMeta, TrialRecord};
pub use schema::{MarkerRole, MarkerSchema, SchemaSegment, DEFAULT_MARKER_SCHEMA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("marker schema: {0}")]
    Schema(String),
    #[error("{source_name} line {line}: {reason}")]
    Format {
        source_name: String,
        line: u64,
        reason: String,
    },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("trial metadata: {0}")]
    Meta(String),
    #[error("alignment: {0}")]
    Alignment(String),
}

impl IngestError {
    pub(crate) fn format(source_name: &str, line: u64, reason: impl Into<String>) -> Self {
        IngestError::Format {
            source_name: source_name.to_string(),
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        IngestError::Io {
            path: path.display().to_string(),
            reason: err.to_string(),
        }
    }
}

/// Check that `times` is strictly increasing and uniformly spaced; returns the mean step.
pub(crate) fn check_timeline(times: &[f64], lines: &[u64], source_name: &str) -> Result<f64, IngestError> {
    for i in 1..times.len() {
        if times[i] <= times[i - 1] {
            let what = if times[i] == times[i - 1] {
                "duplicated timestamp"
            } else {
                "timestamp goes backwards"
            };
            return Err(IngestError::format(
                source_name,
                lines[i],
                format!("{what} {} after {}", times[i], times[i - 1]),
            ));
        }
    }
    if times.len() < 2 {
        return Err(IngestError::format(
            source_name,
            lines.first().copied().unwrap_or(1),
            "need at least two samples",
        ));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for i in 1..times.len() {
        let step = times[i] - times[i - 1];
        if (step - dt).abs() > 0.01 * dt {
            return Err(IngestError::format(
                source_name,
                lines[i],
                format!("non-uniform sampling: step {step} differs from mean step {dt}"),
            ));
        }
    }
    Ok(dt)
}

pub(crate) fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

pub(crate) fn parse_f64(field: &str, source_name: &str, line: u64, column: &str) -> Result<f64, IngestError> {
    let v: f64 = field.parse().map_err(|_| {
        IngestError::format(source_name, line, format!("column `{column}`: `{field}` is not a number"))
    })?;
    if !v.is_finite() {
        return Err(IngestError::format(
            source_name,
            line,
            format!("column `{column}`: non-finite value"),
        ));
    }
    Ok(v)
}

/// Write `text` to `path` via a temporary sibling file and a rename.
pub fn write_atomic(path: &std::path::Path, text: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)
}
