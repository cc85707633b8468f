use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ForcesError;

/// Bundled curve: unit ratio without sand and the 14 cm reference ratio.
pub const DEFAULT_CALIBRATION: &str = include_str!("../../data/calibration_default.csv");

/// One loading measurement: vertical force on the sand surface and on the buried plate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub depth_cm: f64,
    pub f_surface_n: f64,
    pub f_buried_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub depth_cm: f64,
    /// Transmission ratio: buried / surface vertical force.
    pub zeta: f64,
    /// RMS of `f_buried - zeta * f_surface` over the samples at this depth (N).
    pub residual: f64,
    /// Number of samples fitted (0 for tabulated values).
    pub n: usize,
}

/// Depth → force-ratio table, interpolated linearly between depths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    points: Vec<CalibrationPoint>,
}

impl CalibrationCurve {
    pub fn new(points: Vec<CalibrationPoint>) -> Result<Self, ForcesError> {
        let first = points
            .first()
            .ok_or_else(|| ForcesError::Curve("curve has no points".into()))?;
        if first.depth_cm != 0.0 || first.zeta != 1.0 {
            return Err(ForcesError::Curve(format!(
                "curve must start at depth 0 with zeta 1, found ({}, {})",
                first.depth_cm, first.zeta
            )));
        }
        for w in points.windows(2) {
            if !(w[1].depth_cm > w[0].depth_cm) {
                return Err(ForcesError::Curve(format!(
                    "depths must increase strictly ({} then {})",
                    w[0].depth_cm, w[1].depth_cm
                )));
            }
        }
        for p in &points {
            if !(p.zeta > 0.0 && p.zeta <= 1.0) || !p.depth_cm.is_finite() {
                return Err(ForcesError::Curve(format!(
                    "zeta at depth {} cm must lie in (0, 1], got {}",
                    p.depth_cm, p.zeta
                )));
            }
        }
        Ok(CalibrationCurve { points })
    }

    pub fn points(&self) -> &[CalibrationPoint] {
        &self.points
    }

    pub fn max_depth(&self) -> f64 {
        self.points[self.points.len() - 1].depth_cm
    }

    /// Ratio at `depth_cm`, linear between tabulated depths; no extrapolation.
    pub fn zeta_at(&self, depth_cm: f64) -> Result<f64, ForcesError> {
        let max = self.max_depth();
        if !(depth_cm >= 0.0 && depth_cm <= max) {
            return Err(ForcesError::Extrapolation { depth: depth_cm, max });
        }
        let j = self.points.partition_point(|p| p.depth_cm < depth_cm);
        let hi = &self.points[j];
        if hi.depth_cm == depth_cm || j == 0 {
            return Ok(hi.zeta);
        }
        let lo = &self.points[j - 1];
        let w = (depth_cm - lo.depth_cm) / (hi.depth_cm - lo.depth_cm);
        Ok(lo.zeta + w * (hi.zeta - lo.zeta))
    }

    /// Parse the `depth_cm,zeta,residual,n` table.
    pub fn parse(text: &str, source_name: &str) -> Result<Self, ForcesError> {
        let rows = parse_rows(text, source_name, &["depth_cm", "zeta", "residual", "n"])?;
        let points = rows
            .into_iter()
            .map(|(line, v)| {
                if v[3] < 0.0 || v[3].fract() != 0.0 {
                    return Err(ForcesError::Format {
                        source_name: source_name.into(),
                        line,
                        reason: format!("sample count must be a non-negative integer, got {}", v[3]),
                    });
                }
                Ok(CalibrationPoint {
                    depth_cm: v[0],
                    zeta: v[1],
                    residual: v[2],
                    n: v[3] as usize,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        CalibrationCurve::new(points)
    }

    pub fn from_path(path: &Path) -> Result<Self, ForcesError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("depth_cm,zeta,residual,n\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{}", p.depth_cm, p.zeta, p.residual, p.n);
        }
        out
    }

    /// Human-readable fit summary, one line per depth.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let _ = writeln!(
                out,
                "depth {:>5.1} cm  zeta {:.6}  residual {:.4} N  n {}",
                p.depth_cm, p.zeta, p.residual, p.n
            );
        }
        out
    }
}

impl Default for CalibrationCurve {
    fn default() -> Self {
        CalibrationCurve::parse(DEFAULT_CALIBRATION, "bundled calibration").expect("bundled curve is valid")
    }
}

fn io_error(path: &Path, e: std::io::Error) -> ForcesError {
    ForcesError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

fn parse_rows(text: &str, source_name: &str, header: &[&str]) -> Result<Vec<(u64, Vec<f64>)>, ForcesError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let fmt = |line: u64, reason: String| ForcesError::Format {
        source_name: source_name.into(),
        line,
        reason,
    };
    let found = rdr.headers().map_err(|e| fmt(1, e.to_string()))?.clone();
    let header_line = found.position().map_or(1, |p| p.line());
    if found.is_empty() {
        return Ok(Vec::new());
    }
    if found.iter().collect::<Vec<_>>() != header {
        return Err(fmt(header_line, format!("header must be `{}`", header.join(","))));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| fmt(0, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(fmt(line, format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        let vals = rec
            .iter()
            .zip(header)
            .map(|(f, col)| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| fmt(line, format!("column `{col}`: `{f}` is not a finite number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((line, vals));
    }
    Ok(rows)
}

/// Parse `depth_cm,f_surface_n,f_buried_n` rows.
pub fn parse_calibration_samples(text: &str, source_name: &str) -> Result<Vec<CalibrationSample>, ForcesError> {
    let rows = parse_rows(text, source_name, &["depth_cm", "f_surface_n", "f_buried_n"])?;
    Ok(rows
        .into_iter()
        .map(|(_, v)| CalibrationSample {
            depth_cm: v[0],
            f_surface_n: v[1],
            f_buried_n: v[2],
        })
        .collect())
}

/// Fit the force-ratio curve: per depth, the least-squares slope through the
/// origin of buried against surface force, `sum(Fs Fb) / sum(Fs^2)`.
///
/// Each depth needs at least two distinct nonzero load levels. Depth 0 is
/// stored with ratio exactly 1 (its fitted residual is kept as a diagnostic);
/// when no depth-0 data is given the point (0, 1) is added.
pub fn fit_calibration(samples: &[CalibrationSample]) -> Result<CalibrationCurve, ForcesError> {
    if samples.is_empty() {
        return Err(ForcesError::NoSamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.depth_cm.total_cmp(&b.depth_cm));
    if let Some(bad) = sorted.iter().find(|s| !(s.depth_cm >= 0.0)) {
        return Err(ForcesError::Fit {
            depth: bad.depth_cm,
            reason: "depth must be non-negative".into(),
        });
    }
    let mut points = Vec::new();
    for group in sorted.chunk_by(|a, b| a.depth_cm == b.depth_cm) {
        let depth = group[0].depth_cm;
        let fail = |reason: String| ForcesError::Fit { depth, reason };
        let sxx: f64 = group.iter().map(|s| s.f_surface_n * s.f_surface_n).sum();
        if sxx == 0.0 {
            return Err(fail("all surface forces are zero".into()));
        }
        let mut levels: Vec<f64> = group.iter().map(|s| s.f_surface_n).filter(|f| *f != 0.0).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        if levels.len() < 2 {
            return Err(fail(format!("need at least 2 nonzero load levels, found {}", levels.len())));
        }
        let sxy: f64 = group.iter().map(|s| s.f_surface_n * s.f_buried_n).sum();
        let fitted = sxy / sxx;
        let zeta = if depth == 0.0 {
            if (fitted - 1.0).abs() > 0.01 {
                log::warn!("depth 0 fitted ratio {fitted:.4} differs from 1; stored as 1");
            }
            1.0
        } else {
            fitted
        };
        if !(zeta > 0.0 && zeta <= 1.0) {
            return Err(fail(format!("fitted ratio {zeta} outside (0, 1]")));
        }
        let rss: f64 = group
            .iter()
            .map(|s| (s.f_buried_n - zeta * s.f_surface_n).powi(2))
            .sum();
        points.push(CalibrationPoint {
            depth_cm: depth,
            zeta,
            residual: (rss / group.len() as f64).sqrt(),
            n: group.len(),
        });
    }
    if points[0].depth_cm != 0.0 {
        points.insert(
            0,
            CalibrationPoint {
                depth_cm: 0.0,
                zeta: 1.0,
                residual: 0.0,
                n: 0,
            },
        );
    }
    CalibrationCurve::new(points)
}

/// Surface-equivalent vertical force: `F_b / zeta(depth)`.
pub fn calibrate_grf(fz_buried: &[f64], depth_cm: f64, curve: &CalibrationCurve) -> Result<Vec<f64>, ForcesError> {
    let z = curve.zeta_at(depth_cm)?;
    Ok(fz_buried.iter().map(|f| f / z).collect())
}

/// Inverse of [`calibrate_grf`]: `F_s * zeta(depth)`.
pub fn decalibrate_grf(fz_surface: &[f64], depth_cm: f64, curve: &CalibrationCurve) -> Result<Vec<f64>, ForcesError> {
    let z = curve.zeta_at(depth_cm)?;
    Ok(fz_surface.iter().map(|f| f * z).collect())
}
