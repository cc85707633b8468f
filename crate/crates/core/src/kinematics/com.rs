use super::{complete_track, filter_track, KinematicsError, LegKinematics};
use crate::ingest::{MarkerSchema, MarkerSeries};
use crate::model::LegParams;
use crate::types::Vec3;

/// Mean of all pelvis markers per frame, filtered with the marker window.
pub fn pelvis_midpoint(
    markers: &MarkerSeries,
    schema: &MarkerSchema,
    filter_window: usize,
) -> Result<Vec<Vec3>, KinematicsError> {
    let labels = schema.pelvis();
    if labels.is_empty() {
        return Err(KinematicsError::Config("marker schema defines no pelvis markers".into()));
    }
    let mut sum = vec![Vec3::zeros(); markers.len()];
    for label in &labels {
        let track = complete_track(markers, label).map_err(|e| match e {
            KinematicsError::MissingMarker { .. } | KinematicsError::Config(_) => {
                KinematicsError::Config(format!("pelvis marker unavailable: {e}"))
            }
            other => other,
        })?;
        for (s, p) in sum.iter_mut().zip(&track) {
            *s += p;
        }
    }
    let mid: Vec<Vec3> = sum.into_iter().map(|s| s / labels.len() as f64).collect();
    filter_track(&mid, filter_window)
}

/// Whole-body COM estimate: mass-weighted mean of the leg segment COMs, with
/// the remaining body mass lumped at the pelvis midpoint.
pub fn com_trajectory(
    legs: &[(&LegKinematics, &LegParams)],
    pelvis_mid: &[Vec3],
    body_mass: f64,
) -> Result<Vec<Vec3>, KinematicsError> {
    let leg_mass: f64 = legs.iter().map(|(_, p)| p.total_mass()).sum();
    let residual = body_mass - leg_mass;
    if residual < 0.0 {
        return Err(KinematicsError::Config(format!(
            "leg segment masses ({leg_mass:.3} kg) exceed body mass ({body_mass:.3} kg)"
        )));
    }
    for (leg, _) in legs {
        if leg.len() != pelvis_mid.len() {
            return Err(KinematicsError::Parameter(format!(
                "{} leg has {} frames, pelvis track has {}",
                leg.side,
                leg.len(),
                pelvis_mid.len()
            )));
        }
    }
    Ok((0..pelvis_mid.len())
        .map(|i| {
            let mut acc = residual * pelvis_mid[i];
            for (leg, p) in legs {
                acc += p.foot.mass * leg.foot[i].com_pos;
                acc += p.shank.mass * leg.shank[i].com_pos;
                acc += p.thigh.mass * leg.thigh[i].com_pos;
            }
            acc / body_mass
        })
        .collect())
}
