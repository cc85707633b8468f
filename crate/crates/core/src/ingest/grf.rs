use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_timeline, csv_reader, parse_f64, IngestError};
use crate::types::{Terrain, Vec3};

const GRF_COLUMNS: [&str; 9] = ["time", "fx", "fy", "fz", "mx", "my", "mz", "copx", "copy"];

/// One force-plate sample. `force` is the ground reaction acting on the subject
/// (F_z > 0 under load) and `moment` its moment about the plate origin; `cop` is
/// in the plate frame, whose axes are parallel to the lab axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrfSample {
    pub time: f64,
    pub force: Vec3,
    pub moment: Vec3,
    pub cop: [f64; 2],
    pub plate: Terrain,
}

impl GrfSample {
    pub fn zero(time: f64, plate: Terrain) -> Self {
        GrfSample {
            time,
            force: Vec3::zeros(),
            moment: Vec3::zeros(),
            cop: [0.0, 0.0],
            plate,
        }
    }

    /// COP in the lab frame given the plate origin (plate surface at the origin height).
    pub fn cop_lab(&self, plate_origin: &Vec3) -> Vec3 {
        plate_origin + Vec3::new(self.cop[0], self.cop[1], 0.0)
    }

    /// Free moment at the COP: the plate moment transported from the origin.
    pub fn free_moment(&self) -> Vec3 {
        let lever = Vec3::new(self.cop[0], self.cop[1], 0.0);
        self.moment - lever.cross(&self.force)
    }
}

/// Parse a force-plate table with header `time,fx,fy,fz,mx,my,mz,copx,copy`.
pub fn parse_grf(text: &str, source_name: &str, plate: Terrain) -> Result<Vec<GrfSample>, IngestError> {
    let mut rdr = csv_reader(text);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::format(source_name, 1, e.to_string()))?
        .clone();
    let header_line = headers.position().map_or(1, |p| p.line());
    if headers.iter().collect::<Vec<_>>() != GRF_COLUMNS {
        return Err(IngestError::format(
            source_name,
            header_line,
            format!("header must be `{}`", GRF_COLUMNS.join(",")),
        ));
    }
    let mut samples = Vec::new();
    let mut lines = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IngestError::format(source_name, 0, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != GRF_COLUMNS.len() {
            return Err(IngestError::format(
                source_name,
                line,
                format!("expected {} fields, found {}", GRF_COLUMNS.len(), rec.len()),
            ));
        }
        let mut v = [0.0; 9];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = parse_f64(&rec[k], source_name, line, GRF_COLUMNS[k])?;
        }
        samples.push(GrfSample {
            time: v[0],
            force: Vec3::new(v[1], v[2], v[3]),
            moment: Vec3::new(v[4], v[5], v[6]),
            cop: [v[7], v[8]],
            plate,
        });
        lines.push(line);
    }
    if samples.is_empty() {
        return Err(IngestError::format(source_name, header_line, "no force-plate samples"));
    }
    let times: Vec<f64> = samples.iter().map(|s| s.time).collect();
    check_timeline(&times, &lines, source_name)?;
    Ok(samples)
}

pub fn read_grf(path: &Path, plate: Terrain) -> Result<Vec<GrfSample>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    parse_grf(&text, &path.display().to_string(), plate)
}

pub fn write_grf(samples: &[GrfSample]) -> String {
    let mut out = GRF_COLUMNS.join(",");
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.time, s.force.x, s.force.y, s.force.z, s.moment.x, s.moment.y, s.moment.z, s.cop[0], s.cop[1]
        );
    }
    out
}
