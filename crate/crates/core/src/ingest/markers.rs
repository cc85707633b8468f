use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{check_timeline, csv_reader, parse_f64, IngestError, MarkerSchema};
use crate::types::Vec3;

/// All marker positions at one timestamp; `None` marks a missing marker.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerFrame {
    pub time: f64,
    pub positions: BTreeMap<String, Option<Vec3>>,
}

/// Marker trajectories stored column-wise: one position track per label.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerSeries {
    times: Vec<f64>,
    labels: Vec<String>,
    tracks: Vec<Vec<Option<Vec3>>>,
}

impl MarkerSeries {
    /// Build from per-label tracks; every track must have one entry per timestamp.
    pub fn new(times: Vec<f64>, tracks: Vec<(String, Vec<Option<Vec3>>)>) -> Result<Self, IngestError> {
        let mut labels = Vec::with_capacity(tracks.len());
        let mut data = Vec::with_capacity(tracks.len());
        for (label, track) in tracks {
            if track.len() != times.len() {
                return Err(IngestError::Schema(format!(
                    "track `{label}` has {} samples, expected {}",
                    track.len(),
                    times.len()
                )));
            }
            if labels.contains(&label) {
                return Err(IngestError::Schema(format!("duplicate marker `{label}`")));
            }
            labels.push(label);
            data.push(track);
        }
        Ok(MarkerSeries {
            times,
            labels,
            tracks: data,
        })
    }

    pub fn from_frames(frames: &[MarkerFrame]) -> Result<Self, IngestError> {
        let labels: Vec<String> = frames
            .first()
            .map(|f| f.positions.keys().cloned().collect())
            .unwrap_or_default();
        let mut tracks: Vec<(String, Vec<Option<Vec3>>)> =
            labels.iter().map(|l| (l.clone(), Vec::with_capacity(frames.len()))).collect();
        for f in frames {
            if f.positions.len() != labels.len() {
                return Err(IngestError::Schema(format!("frame at t={} has a different label set", f.time)));
            }
            for (label, track) in tracks.iter_mut() {
                let p = f.positions.get(label.as_str()).ok_or_else(|| {
                    IngestError::Schema(format!("frame at t={} lacks `{label}`", f.time))
                })?;
                track.push(*p);
            }
        }
        MarkerSeries::new(frames.iter().map(|f| f.time).collect(), tracks)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Mean sampling interval (s).
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            return f64::NAN;
        }
        (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64
    }

    pub fn track(&self, label: &str) -> Option<&[Option<Vec3>]> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.tracks[i].as_slice())
    }

    pub(crate) fn tracks_mut(&mut self) -> impl Iterator<Item = &mut Vec<Option<Vec3>>> {
        self.tracks.iter_mut()
    }

    pub fn frame(&self, i: usize) -> MarkerFrame {
        MarkerFrame {
            time: self.times[i],
            positions: self
                .labels
                .iter()
                .zip(&self.tracks)
                .map(|(l, t)| (l.clone(), t[i]))
                .collect(),
        }
    }

    /// Frames `range` as a new series.
    pub fn slice(&self, range: std::ops::Range<usize>) -> MarkerSeries {
        MarkerSeries {
            times: self.times[range.clone()].to_vec(),
            labels: self.labels.clone(),
            tracks: self.tracks.iter().map(|t| t[range.clone()].to_vec()).collect(),
        }
    }

    /// Count of missing marker samples over all tracks.
    pub fn missing_count(&self) -> usize {
        self.tracks.iter().flatten().filter(|p| p.is_none()).count()
    }

    /// Rigidly translate every position.
    pub fn translated(&self, offset: Vec3) -> MarkerSeries {
        let mut out = self.clone();
        for t in out.tracks.iter_mut() {
            for p in t.iter_mut().flatten() {
                *p += offset;
            }
        }
        out
    }

    /// Check the label set against a schema: unknown labels list the expected
    /// set, absent labels are named.
    pub fn validate_schema(&self, schema: &MarkerSchema) -> Result<(), IngestError> {
        let expected = schema.label_set();
        for l in &self.labels {
            if !expected.contains(l.as_str()) {
                return Err(IngestError::Schema(format!(
                    "unknown marker label `{l}`; expected labels: {}",
                    expected.iter().copied().collect::<Vec<_>>().join(", ")
                )));
            }
        }
        for l in schema.labels() {
            if !self.labels.contains(l) {
                return Err(IngestError::Schema(format!("missing marker label `{l}`")));
            }
        }
        Ok(())
    }
}

/// Parse a marker table with header `time,<label>_x,<label>_y,<label>_z,...`.
/// An empty coordinate field marks the marker missing in that frame.
pub fn parse_markers(text: &str, source_name: &str) -> Result<MarkerSeries, IngestError> {
    let mut rdr = csv_reader(text);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::format(source_name, 1, e.to_string()))?
        .clone();
    let header_line = headers.position().map_or(1, |p| p.line());
    let cols: Vec<&str> = headers.iter().collect();
    if cols.first() != Some(&"time") {
        return Err(IngestError::format(source_name, header_line, "first column must be `time`"));
    }
    if (cols.len() - 1) % 3 != 0 {
        return Err(IngestError::format(
            source_name,
            header_line,
            "marker columns must come in _x,_y,_z triples",
        ));
    }
    let mut labels = Vec::new();
    for triple in cols[1..].chunks(3) {
        let label = triple[0].strip_suffix("_x").ok_or_else(|| {
            IngestError::format(source_name, header_line, format!("column `{}` should end in _x", triple[0]))
        })?;
        for (col, axis) in triple.iter().zip(["_x", "_y", "_z"]) {
            if *col != format!("{label}{axis}") {
                return Err(IngestError::format(
                    source_name,
                    header_line,
                    format!("expected column `{label}{axis}`, found `{col}`"),
                ));
            }
        }
        labels.push(label.to_string());
    }

    let mut times = Vec::new();
    let mut lines = Vec::new();
    let mut tracks: Vec<Vec<Option<Vec3>>> = vec![Vec::new(); labels.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IngestError::format(source_name, 0, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != cols.len() {
            return Err(IngestError::format(
                source_name,
                line,
                format!("expected {} fields, found {}", cols.len(), rec.len()),
            ));
        }
        times.push(parse_f64(&rec[0], source_name, line, "time")?);
        lines.push(line);
        for (m, track) in tracks.iter_mut().enumerate() {
            let f = [&rec[1 + 3 * m], &rec[2 + 3 * m], &rec[3 + 3 * m]];
            if f.iter().any(|s| s.is_empty()) {
                track.push(None);
                continue;
            }
            let mut v = Vec3::zeros();
            for k in 0..3 {
                v[k] = parse_f64(f[k], source_name, line, cols[1 + 3 * m + k])?;
            }
            track.push(Some(v));
        }
    }
    if times.is_empty() {
        return Err(IngestError::format(source_name, header_line, "no marker frames"));
    }
    check_timeline(&times, &lines, source_name)?;
    MarkerSeries::new(times, labels.into_iter().zip(tracks).collect())
}

pub fn read_markers(path: &Path) -> Result<MarkerSeries, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    parse_markers(&text, &path.display().to_string())
}

/// Serialize in the format read by [`parse_markers`]. Values use the shortest
/// representation that round-trips exactly.
pub fn write_markers(series: &MarkerSeries) -> String {
    let mut out = String::from("time");
    for l in &series.labels {
        let _ = write!(out, ",{l}_x,{l}_y,{l}_z");
    }
    out.push('\n');
    for i in 0..series.len() {
        let _ = write!(out, "{}", series.times[i]);
        for t in &series.tracks {
            match t[i] {
                Some(p) => {
                    let _ = write!(out, ",{},{},{}", p.x, p.y, p.z);
                }
                None => out.push_str(",,,"),
            }
        }
        out.push('\n');
    }
    out
}
