//! Anthropometric scaling.
//!
//! A [`Participant`] (height, mass) and an [`AnthropometricTable`] of
//! per-segment ratios become [`SegmentParams`]: mass, length, COM offset from
//! the proximal joint, and moment of inertia about the COM.
//!
//! The gyration ratio in the table is interpreted as the radius of gyration
//! about the segment COM, so `I = m * (gyration_fraction * length)^2`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::Vec3;

/// Bundled ratio table (lower-limb segments plus the lumped upper body).
pub const DEFAULT_ANTHROPOMETRICS: &str = include_str!("../data/anthropometrics.csv");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("participant {field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("segment `{segment}`: {reason}")]
    Segment { segment: String, reason: String },
    #[error("anthropometric table line {line}: {reason}")]
    TableFormat { line: usize, reason: String },
    #[error("anthropometric table: modeled mass fractions sum to {0:.4} (> 1)")]
    MassBudget(f64),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("gravity must be positive, got {0}")]
    Gravity(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub id: String,
    /// Standing height (m).
    pub height_m: f64,
    /// Body mass (kg).
    pub mass_kg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age_years: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sex: Option<String>,
}

impl Participant {
    pub fn new(id: impl Into<String>, height_m: f64, mass_kg: f64) -> Result<Self, ModelError> {
        let p = Participant {
            id: id.into(),
            height_m,
            mass_kg,
            age_years: None,
            sex: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.height_m > 0.0 && self.height_m.is_finite()) {
            return Err(ModelError::NonPositive {
                field: "height",
                value: self.height_m,
            });
        }
        if !(self.mass_kg > 0.0 && self.mass_kg.is_finite()) {
            return Err(ModelError::NonPositive {
                field: "mass",
                value: self.mass_kg,
            });
        }
        Ok(())
    }

    /// Body weight in newtons.
    pub fn weight(&self, constants: &Constants) -> f64 {
        self.mass_kg * constants.gravity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Gravitational acceleration magnitude (m/s^2). Gravity acts along -Z.
    pub gravity: f64,
}

impl Constants {
    pub fn new(gravity: f64) -> Result<Self, ModelError> {
        if !(gravity > 0.0 && gravity.is_finite()) {
            return Err(ModelError::Gravity(gravity));
        }
        Ok(Constants { gravity })
    }

    /// Vertical unit vector `e_z`.
    pub fn up() -> Vec3 {
        Vec3::z()
    }
}

impl Default for Constants {
    fn default() -> Self {
        Constants { gravity: 9.81 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Foot,
    Shank,
    Thigh,
    /// Head, arms and trunk lumped into one body.
    Hat,
}

impl SegmentKind {
    pub const LEG: [SegmentKind; 3] = [SegmentKind::Foot, SegmentKind::Shank, SegmentKind::Thigh];

    pub fn name(self) -> &'static str {
        match self {
            SegmentKind::Foot => "foot",
            SegmentKind::Shank => "shank",
            SegmentKind::Thigh => "thigh",
            SegmentKind::Hat => "hat",
        }
    }
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SegmentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "foot" => Ok(SegmentKind::Foot),
            "shank" | "leg" => Ok(SegmentKind::Shank),
            "thigh" => Ok(SegmentKind::Thigh),
            "hat" | "trunk" => Ok(SegmentKind::Hat),
            other => Err(format!("unknown segment `{other}`")),
        }
    }
}

/// Dimensionless ratios for one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentRatios {
    pub mass_fraction: f64,
    pub com_fraction: f64,
    pub gyration_fraction: f64,
}

impl SegmentRatios {
    fn validate(&self, segment: SegmentKind) -> Result<(), ModelError> {
        for (name, v) in [
            ("mass_fraction", self.mass_fraction),
            ("com_fraction", self.com_fraction),
            ("gyration_fraction", self.gyration_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(ModelError::Segment {
                    segment: segment.to_string(),
                    reason: format!("{name} must lie in (0, 1), got {v}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnthropometricTable {
    rows: BTreeMap<SegmentKind, SegmentRatios>,
}

impl AnthropometricTable {
    pub fn new(rows: BTreeMap<SegmentKind, SegmentRatios>) -> Result<Self, ModelError> {
        for (kind, r) in &rows {
            r.validate(*kind)?;
        }
        let legs: f64 = SegmentKind::LEG
            .iter()
            .filter_map(|k| rows.get(k))
            .map(|r| 2.0 * r.mass_fraction)
            .sum();
        let hat = rows.get(&SegmentKind::Hat).map_or(0.0, |r| r.mass_fraction);
        if legs + hat > 1.0 + 1e-9 {
            return Err(ModelError::MassBudget(legs + hat));
        }
        Ok(AnthropometricTable { rows })
    }

    /// Parse the delimited table format: `name,mass_fraction,com_fraction,gyration_fraction`.
    /// Fields may be separated by commas or whitespace; `#` starts a comment line and an
    /// optional header row whose first field is `name` is skipped.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut rows = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.first().is_some_and(|f| f.eq_ignore_ascii_case("name")) {
                continue;
            }
            if fields.len() != 4 {
                return Err(ModelError::TableFormat {
                    line: lineno,
                    reason: format!("expected 4 fields, found {}", fields.len()),
                });
            }
            let kind: SegmentKind = fields[0].parse().map_err(|reason| ModelError::TableFormat {
                line: lineno,
                reason,
            })?;
            let num = |s: &str| {
                s.parse::<f64>().map_err(|_| ModelError::TableFormat {
                    line: lineno,
                    reason: format!("`{s}` is not a number"),
                })
            };
            let ratios = SegmentRatios {
                mass_fraction: num(fields[1])?,
                com_fraction: num(fields[2])?,
                gyration_fraction: num(fields[3])?,
            };
            if rows.insert(kind, ratios).is_some() {
                return Err(ModelError::TableFormat {
                    line: lineno,
                    reason: format!("duplicate segment `{kind}`"),
                });
            }
        }
        AnthropometricTable::new(rows)
    }

    pub fn from_path(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn ratios(&self, kind: SegmentKind) -> Result<&SegmentRatios, ModelError> {
        self.rows.get(&kind).ok_or_else(|| ModelError::Segment {
            segment: kind.to_string(),
            reason: "missing from anthropometric table".into(),
        })
    }

    /// Mass fraction of both legs combined.
    pub fn bilateral_leg_fraction(&self) -> Result<f64, ModelError> {
        SegmentKind::LEG
            .iter()
            .map(|k| self.ratios(*k).map(|r| 2.0 * r.mass_fraction))
            .sum()
    }
}

impl Default for AnthropometricTable {
    fn default() -> Self {
        AnthropometricTable::parse(DEFAULT_ANTHROPOMETRICS).expect("bundled table is valid")
    }
}

/// Rigid-segment parameters used by the kinetic computations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SegmentParams {
    /// Segment mass (kg).
    pub mass: f64,
    /// Proximal-to-distal joint distance (m).
    pub length: f64,
    /// Proximal joint to COM distance (m).
    pub com_offset: f64,
    /// Moment of inertia about the COM, sagittal axis (kg m^2).
    pub inertia: f64,
}

impl SegmentParams {
    pub fn from_ratios(body_mass: f64, ratios: &SegmentRatios, length: f64) -> Self {
        let mass = ratios.mass_fraction * body_mass;
        let radius = ratios.gyration_fraction * length;
        SegmentParams {
            mass,
            length,
            com_offset: ratios.com_fraction * length,
            inertia: mass * radius * radius,
        }
    }
}

/// Measured (or configured) segment lengths for one leg, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentLengths {
    pub foot: f64,
    pub shank: f64,
    pub thigh: f64,
}

impl SegmentLengths {
    pub fn get(&self, kind: SegmentKind) -> Option<f64> {
        match kind {
            SegmentKind::Foot => Some(self.foot),
            SegmentKind::Shank => Some(self.shank),
            SegmentKind::Thigh => Some(self.thigh),
            SegmentKind::Hat => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegParams {
    pub foot: SegmentParams,
    pub shank: SegmentParams,
    pub thigh: SegmentParams,
}

impl LegParams {
    pub fn get(&self, kind: SegmentKind) -> Option<&SegmentParams> {
        match kind {
            SegmentKind::Foot => Some(&self.foot),
            SegmentKind::Shank => Some(&self.shank),
            SegmentKind::Thigh => Some(&self.thigh),
            SegmentKind::Hat => None,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.foot.mass + self.shank.mass + self.thigh.mass
    }
}

/// Scale a participant into per-segment parameters for one leg.
pub fn segment_parameters(
    participant: &Participant,
    table: &AnthropometricTable,
    lengths: &SegmentLengths,
) -> Result<LegParams, ModelError> {
    participant.validate()?;
    let one = |kind: SegmentKind| -> Result<SegmentParams, ModelError> {
        let length = lengths.get(kind).unwrap_or(f64::NAN);
        if !(length > 0.0 && length.is_finite()) {
            return Err(ModelError::Segment {
                segment: kind.to_string(),
                reason: format!("length must be positive, got {length}"),
            });
        }
        let ratios = table.ratios(kind)?;
        Ok(SegmentParams::from_ratios(participant.mass_kg, ratios, length))
    };
    Ok(LegParams {
        foot: one(SegmentKind::Foot)?,
        shank: one(SegmentKind::Shank)?,
        thigh: one(SegmentKind::Thigh)?,
    })
}
