use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{csv_reader, IngestError};
use crate::model::SegmentKind;
use crate::types::Side;

/// Bundled 18-marker schema.
pub const DEFAULT_MARKER_SCHEMA: &str = include_str!("../../data/marker_schema.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemaSegment {
    Pelvis,
    Thigh,
    Shank,
    Foot,
}

impl SchemaSegment {
    pub fn kind(self) -> Option<SegmentKind> {
        match self {
            SchemaSegment::Pelvis => None,
            SchemaSegment::Thigh => Some(SegmentKind::Thigh),
            SchemaSegment::Shank => Some(SegmentKind::Shank),
            SchemaSegment::Foot => Some(SegmentKind::Foot),
        }
    }

    fn from_kind(kind: SegmentKind) -> Option<Self> {
        match kind {
            SegmentKind::Thigh => Some(SchemaSegment::Thigh),
            SegmentKind::Shank => Some(SchemaSegment::Shank),
            SegmentKind::Foot => Some(SchemaSegment::Foot),
            SegmentKind::Hat => None,
        }
    }
}

impl FromStr for SchemaSegment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pelvis" => Ok(SchemaSegment::Pelvis),
            "thigh" => Ok(SchemaSegment::Thigh),
            "shank" => Ok(SchemaSegment::Shank),
            "foot" => Ok(SchemaSegment::Foot),
            other => Err(format!("unknown segment `{other}` (expected pelvis, thigh, shank or foot)")),
        }
    }
}

impl fmt::Display for SchemaSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SchemaSegment::Pelvis => "pelvis",
            SchemaSegment::Thigh => "thigh",
            SchemaSegment::Shank => "shank",
            SchemaSegment::Foot => "foot",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerRole {
    Proximal,
    Distal,
    Auxiliary,
}

impl FromStr for MarkerRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "proximal" => Ok(MarkerRole::Proximal),
            "distal" => Ok(MarkerRole::Distal),
            "auxiliary" | "aux" => Ok(MarkerRole::Auxiliary),
            other => Err(format!("unknown role `{other}` (expected proximal, distal or auxiliary)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaEntry {
    pub label: String,
    pub segment: SchemaSegment,
    pub side: Side,
    pub role: MarkerRole,
}

/// Label → (segment, side, role) mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerSchema {
    entries: Vec<SchemaEntry>,
    labels: Vec<String>,
}

impl MarkerSchema {
    pub fn new(entries: Vec<SchemaEntry>) -> Result<Self, IngestError> {
        let mut labels = Vec::new();
        for e in &entries {
            if e.label.is_empty() || e.label.contains(',') {
                return Err(IngestError::Schema(format!("invalid label `{}`", e.label)));
            }
            if !labels.contains(&e.label) {
                labels.push(e.label.clone());
            }
        }
        let schema = MarkerSchema { entries, labels };
        for side in Side::BOTH {
            for kind in SegmentKind::LEG {
                let seg = SchemaSegment::from_kind(kind).expect("leg segment");
                for role in [MarkerRole::Proximal, MarkerRole::Distal] {
                    let n = schema.find(side, seg, role).count();
                    if n != 1 {
                        return Err(IngestError::Schema(format!(
                            "{side} {seg} needs exactly one {role:?} marker, found {n}"
                        )
                        .to_lowercase()));
                    }
                }
            }
            if schema.find(side, SchemaSegment::Foot, MarkerRole::Auxiliary).next().is_none() {
                return Err(IngestError::Schema(format!("{side} foot needs an auxiliary heel marker")));
            }
        }
        Ok(schema)
    }

    /// Parse `label,segment,side,role` rows (`#` comments, optional header).
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut rdr = csv_reader(text);
        let headers = rdr
            .headers()
            .map_err(|e| IngestError::Schema(e.to_string()))?
            .clone();
        let expected = ["label", "segment", "side", "role"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(IngestError::Schema(format!(
                "header must be `{}`, found `{}`",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut entries = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| IngestError::Schema(e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != 4 {
                return Err(IngestError::format("marker schema", line, "expected 4 fields"));
            }
            let bad = |reason: String| IngestError::format("marker schema", line, reason);
            entries.push(SchemaEntry {
                label: rec[0].to_string(),
                segment: rec[1].parse().map_err(bad)?,
                side: rec[2].parse().map_err(bad)?,
                role: rec[3].parse().map_err(bad)?,
            });
        }
        MarkerSchema::new(entries)
    }

    pub fn from_path(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn entries(&self) -> &[SchemaEntry] {
        &self.entries
    }

    /// Distinct labels in schema order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_set(&self) -> BTreeSet<&str> {
        self.labels.iter().map(String::as_str).collect()
    }

    fn find(&self, side: Side, segment: SchemaSegment, role: MarkerRole) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(move |e| e.side == side && e.segment == segment && e.role == role)
            .map(|e| e.label.as_str())
    }

    /// (proximal, distal) marker labels of a leg segment.
    pub fn endpoints(&self, side: Side, kind: SegmentKind) -> Option<(&str, &str)> {
        let seg = SchemaSegment::from_kind(kind)?;
        let p = self.find(side, seg, MarkerRole::Proximal).next()?;
        let d = self.find(side, seg, MarkerRole::Distal).next()?;
        Some((p, d))
    }

    /// Heel marker: the first auxiliary foot marker.
    pub fn heel(&self, side: Side) -> &str {
        self.find(side, SchemaSegment::Foot, MarkerRole::Auxiliary)
            .next()
            .expect("validated at construction")
    }

    /// Toe marker: the distal foot marker.
    pub fn toe(&self, side: Side) -> &str {
        self.endpoints(side, SegmentKind::Foot).expect("validated at construction").1
    }

    /// All pelvis markers (both sides).
    pub fn pelvis(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.segment == SchemaSegment::Pelvis)
            .map(|e| e.label.as_str())
            .collect()
    }
}

impl Default for MarkerSchema {
    fn default() -> Self {
        MarkerSchema::parse(DEFAULT_MARKER_SCHEMA).expect("bundled schema is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_schema_has_18_labels() {
        let s = MarkerSchema::default();
        assert_eq!(s.labels().len(), 18);
        assert_eq!(s.endpoints(Side::Right, SegmentKind::Shank), Some(("R-knee", "R-ankle")));
        assert_eq!(s.heel(Side::Left), "L-heel");
        assert_eq!(s.toe(Side::Right), "R-toe");
        assert_eq!(s.pelvis().len(), 4);
    }

    #[test]
    fn missing_distal_rejected() {
        let text = DEFAULT_MARKER_SCHEMA.replace("L-toe,foot,left,distal\n", "");
        let err = MarkerSchema::parse(&text).unwrap_err();
        assert!(err.to_string().contains("left foot"), "{err}");
    }

    #[test]
    fn bad_role_reports_line() {
        let text = "label,segment,side,role\nR-hip,thigh,right,middle\n";
        match MarkerSchema::parse(text).unwrap_err() {
            IngestError::Format { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
    }
}
