use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_grf, read_markers, GrfSample, IngestError, MarkerSchema, MarkerSeries};
use crate::model::Participant;
use crate::types::{Terrain, Vec3};

/// Trial metadata, normally stored as `trial.toml` next to the data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialMeta {
    /// Marker table path, relative to the metadata file.
    #[serde(default = "default_markers")]
    pub markers: PathBuf,
    /// Force-plate table path, relative to the metadata file.
    #[serde(default = "default_grf")]
    pub grf: PathBuf,
    pub participant_id: String,
    pub height_m: f64,
    pub mass_kg: f64,
    pub terrain: Terrain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sand_depth_cm: Option<f64>,
    /// Added to force-plate timestamps to put them on the marker clock.
    #[serde(default)]
    pub sync_offset_s: f64,
    /// Lab position of the plate-frame origin (m).
    #[serde(default)]
    pub plate_origin_m: [f64; 3],
}

fn default_markers() -> PathBuf {
    PathBuf::from("markers.csv")
}

fn default_grf() -> PathBuf {
    PathBuf::from("grf.csv")
}

impl TrialMeta {
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let meta: TrialMeta = toml::from_str(text).map_err(|e| IngestError::Meta(e.to_string()))?;
        meta.validate()?;
        Ok(meta)
    }

    pub fn from_path(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("metadata serializes")
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        self.participant().map_err(|e| IngestError::Meta(e.to_string()))?;
        match (self.terrain, self.sand_depth_cm) {
            (Terrain::Sand, None) => {
                return Err(IngestError::Meta("sand_depth_cm is required for terrain = sand".into()))
            }
            (Terrain::Solid, Some(_)) => {
                return Err(IngestError::Meta("sand_depth_cm is only valid for terrain = sand".into()))
            }
            (Terrain::Sand, Some(d)) if !(d >= 0.0 && d.is_finite()) => {
                return Err(IngestError::Meta(format!("sand_depth_cm must be non-negative, got {d}")))
            }
            _ => {}
        }
        if !self.sync_offset_s.is_finite() || self.plate_origin_m.iter().any(|v| !v.is_finite()) {
            return Err(IngestError::Meta("sync_offset_s and plate_origin_m must be finite".into()));
        }
        Ok(())
    }

    pub fn participant(&self) -> Result<Participant, crate::model::ModelError> {
        Participant::new(self.participant_id.clone(), self.height_m, self.mass_kg)
    }
}

/// One walking trial with both raw streams.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub participant: Participant,
    pub terrain: Terrain,
    pub markers: MarkerSeries,
    pub grf: Vec<GrfSample>,
    pub sync_offset_s: f64,
    pub sand_depth_cm: Option<f64>,
    pub plate_origin: Vec3,
}

impl TrialRecord {
    /// Assemble and validate a record against metadata and a marker schema.
    pub fn new(
        meta: &TrialMeta,
        markers: MarkerSeries,
        grf: Vec<GrfSample>,
        schema: &MarkerSchema,
    ) -> Result<Self, IngestError> {
        meta.validate()?;
        markers.validate_schema(schema)?;
        if markers.is_empty() || grf.is_empty() {
            return Err(IngestError::Meta("both marker and force-plate streams must be nonempty".into()));
        }
        Ok(TrialRecord {
            participant: meta.participant().map_err(|e| IngestError::Meta(e.to_string()))?,
            terrain: meta.terrain,
            markers,
            grf,
            sync_offset_s: meta.sync_offset_s,
            sand_depth_cm: meta.sand_depth_cm,
            plate_origin: Vec3::from(meta.plate_origin_m),
        })
    }
}

/// Parse and validate a trial from its two data files.
pub fn parse_trial(
    marker_file: &Path,
    grf_file: &Path,
    meta: &TrialMeta,
    schema: &MarkerSchema,
) -> Result<TrialRecord, IngestError> {
    meta.validate()?;
    let markers = read_markers(marker_file)?;
    let grf = read_grf(grf_file, meta.terrain)?;
    TrialRecord::new(meta, markers, grf, schema)
}

/// Load a trial from its metadata file; data paths resolve relative to it.
pub fn load_trial(meta_path: &Path, schema: &MarkerSchema) -> Result<TrialRecord, IngestError> {
    let meta = TrialMeta::from_path(meta_path)?;
    let base = meta_path.parent().unwrap_or_else(|| Path::new("."));
    parse_trial(&base.join(&meta.markers), &base.join(&meta.grf), &meta, schema)
}
