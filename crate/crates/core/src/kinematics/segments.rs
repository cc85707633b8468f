use serde::Serialize;

use super::{differentiate, moving_average, KinematicsError};
use crate::ingest::{MarkerSchema, MarkerSeries};
use crate::model::{LegParams, SegmentKind, SegmentLengths, SegmentParams};
use crate::types::{Side, Vec3};

/// Shortest sagittal segment projection accepted (m).
pub const MIN_SEGMENT_LENGTH: f64 = 1e-3;

/// Kinematics of one rigid segment at one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentState {
    pub time: f64,
    /// Unit vector from the proximal to the distal joint, projected onto the X-Z plane.
    pub e: Vec3,
    /// Filtered proximal joint position.
    pub proximal: Vec3,
    pub com_pos: Vec3,
    pub com_vel: Vec3,
    pub com_acc: Vec3,
    /// Segment angle about +Y, `atan2(e_x, e_z)`, unwrapped (rad).
    pub theta: f64,
    pub omega: f64,
    pub omega_dot: f64,
}

/// Per-frame states of the three leg segments of one side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegKinematics {
    pub side: Side,
    pub times: Vec<f64>,
    pub foot: Vec<SegmentState>,
    pub shank: Vec<SegmentState>,
    pub thigh: Vec<SegmentState>,
}

impl LegKinematics {
    pub fn segment(&self, kind: SegmentKind) -> &[SegmentState] {
        match kind {
            SegmentKind::Foot => &self.foot,
            SegmentKind::Shank => &self.shank,
            SegmentKind::Thigh | SegmentKind::Hat => &self.thigh,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Positions of a marker with every frame present.
pub(crate) fn complete_track(markers: &MarkerSeries, label: &str) -> Result<Vec<Vec3>, KinematicsError> {
    let track = markers
        .track(label)
        .ok_or_else(|| KinematicsError::Config(format!("marker `{label}` not in trial")))?;
    track
        .iter()
        .zip(markers.times())
        .map(|(p, &t)| {
            p.ok_or_else(|| KinematicsError::MissingMarker {
                label: label.to_string(),
                time: t,
            })
        })
        .collect()
}

/// Moving average applied to each coordinate of a vector track.
pub fn filter_track(track: &[Vec3], window: usize) -> Result<Vec<Vec3>, KinematicsError> {
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    for (k, col) in cols.iter_mut().enumerate() {
        *col = moving_average(&track.iter().map(|p| p[k]).collect::<Vec<_>>(), window)?;
    }
    Ok((0..track.len()).map(|i| Vec3::new(cols[0][i], cols[1][i], cols[2][i])).collect())
}

/// Per-coordinate derivative of a vector track.
pub fn differentiate_track(track: &[Vec3], dt: f64, order: u8) -> Result<Vec<Vec3>, KinematicsError> {
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    for (k, col) in cols.iter_mut().enumerate() {
        *col = differentiate(&track.iter().map(|p| p[k]).collect::<Vec<_>>(), dt, order)?;
    }
    Ok((0..track.len()).map(|i| Vec3::new(cols[0][i], cols[1][i], cols[2][i])).collect())
}

/// Trial-wide mean 3-D distance between each segment's proximal and distal
/// markers, over frames where both are present.
pub fn measure_segment_lengths(
    markers: &MarkerSeries,
    schema: &MarkerSchema,
    side: Side,
) -> Result<SegmentLengths, KinematicsError> {
    let one = |kind: SegmentKind| -> Result<f64, KinematicsError> {
        let (p, d) = schema
            .endpoints(side, kind)
            .ok_or_else(|| KinematicsError::Config(format!("no {side} {kind} markers in schema")))?;
        let (tp, td) = (
            markers.track(p).ok_or_else(|| KinematicsError::Config(format!("marker `{p}` not in trial")))?,
            markers.track(d).ok_or_else(|| KinematicsError::Config(format!("marker `{d}` not in trial")))?,
        );
        let dists: Vec<f64> = tp
            .iter()
            .zip(td)
            .filter_map(|(a, b)| Some((b.as_ref()? - a.as_ref()?).norm()))
            .collect();
        if dists.is_empty() {
            return Err(KinematicsError::Config(format!(
                "{side} {kind}: no frame with both `{p}` and `{d}` present"
            )));
        }
        Ok(dists.iter().sum::<f64>() / dists.len() as f64)
    };
    Ok(SegmentLengths {
        foot: one(SegmentKind::Foot)?,
        shank: one(SegmentKind::Shank)?,
        thigh: one(SegmentKind::Thigh)?,
    })
}

/// Unwrap an angle sequence so consecutive samples differ by less than pi.
pub(crate) fn unwrap(angles: &mut [f64]) {
    for i in 1..angles.len() {
        let d = angles[i] - angles[i - 1];
        let k = (d / std::f64::consts::TAU).round();
        angles[i] -= k * std::f64::consts::TAU;
    }
}

/// States of one segment from its proximal and distal marker tracks.
pub fn single_segment_states(
    times: &[f64],
    proximal: &[Vec3],
    distal: &[Vec3],
    params: &SegmentParams,
    filter_window: usize,
    name: &str,
) -> Result<Vec<SegmentState>, KinematicsError> {
    let n = times.len();
    if n < 3 {
        return Err(KinematicsError::Parameter(format!("{name}: need at least 3 frames, got {n}")));
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    let prox = filter_track(proximal, filter_window)?;
    let dist = filter_track(distal, filter_window)?;
    let mut e = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    for i in 0..n {
        let d = dist[i] - prox[i];
        let planar = Vec3::new(d.x, 0.0, d.z);
        let len = planar.norm();
        if len < MIN_SEGMENT_LENGTH {
            return Err(KinematicsError::Singular {
                segment: name.to_string(),
                time: times[i],
            });
        }
        let u = planar / len;
        theta.push(u.x.atan2(u.z));
        e.push(u);
    }
    unwrap(&mut theta);
    let omega = differentiate(&theta, dt, 1)?;
    let omega_dot = differentiate(&theta, dt, 2)?;
    let com: Vec<Vec3> = (0..n).map(|i| prox[i] + params.com_offset * e[i]).collect();
    let vel = differentiate_track(&com, dt, 1)?;
    let acc = differentiate_track(&com, dt, 2)?;
    Ok((0..n)
        .map(|i| SegmentState {
            time: times[i],
            e: e[i],
            proximal: prox[i],
            com_pos: com[i],
            com_vel: vel[i],
            com_acc: acc[i],
            theta: theta[i],
            omega: omega[i],
            omega_dot: omega_dot[i],
        })
        .collect())
}

/// Filtered states of the foot, shank and thigh of one side.
pub fn segment_states(
    markers: &MarkerSeries,
    schema: &MarkerSchema,
    side: Side,
    params: &LegParams,
    filter_window: usize,
) -> Result<LegKinematics, KinematicsError> {
    let times = markers.times().to_vec();
    let one = |kind: SegmentKind| -> Result<Vec<SegmentState>, KinematicsError> {
        let (p, d) = schema
            .endpoints(side, kind)
            .ok_or_else(|| KinematicsError::Config(format!("no {side} {kind} markers in schema")))?;
        let seg = params.get(kind).expect("leg segment");
        single_segment_states(
            &times,
            &complete_track(markers, p)?,
            &complete_track(markers, d)?,
            seg,
            filter_window,
            &format!("{side} {kind}"),
        )
    };
    Ok(LegKinematics {
        side,
        foot: one(SegmentKind::Foot)?,
        shank: one(SegmentKind::Shank)?,
        thigh: one(SegmentKind::Thigh)?,
        times,
    })
}
