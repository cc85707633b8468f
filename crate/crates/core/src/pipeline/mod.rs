//! End-to-end analysis of one trial: ingest, kinematics, events, loads,
//! inverse dynamics and per-trial metrics.

mod attribution;
mod output;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use attribution::{stance_intervals, FrameLoad, StanceInterval};
pub use output::{
    angle_table, curve_table, divergence_table, event_table, moment_table, stiffness_table, stride_table,
    TrialSummary,
};

use crate::dynamics::{leg_moment_series, ExternalLoad, JointMomentSeries};
use crate::forces::{extract_grf_features, CalibrationCurve, GrfFeatures};
use crate::gaitseg::{
    contact_onsets, cross_check_contacts, detect_gait_events, phase_normalize, EventThresholds, GaitEvents,
    NormalizedCurve, PhaseKind, SegmentationError,
};
use crate::ingest::{align_streams, fill_gaps, MarkerSchema, TrialRecord, DEFAULT_MAX_GAP};
use crate::kinematics::{
    com_trajectory, complete_track, filter_track, joint_angles, measure_segment_lengths, pelvis_midpoint,
    segment_states, JointAngleSeries, LegKinematics,
};
use crate::metrics::{knee_stiffness, peak_angles, stride_metrics, PeakAngles, StiffnessResult, StrideInputs, StrideMetrics};
use crate::model::{segment_parameters, AnthropometricTable, Constants, LegParams, Participant, SegmentLengths};
use crate::types::{Joint, Side, Terrain, Vec3};
use crate::Error;

/// Pelvis travel below which a trial without gait events is treated as standing (m).
pub const STATIC_PELVIS_RANGE_M: f64 = 0.05;

/// Numeric knobs of the analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Moving-average window (frames, odd) applied to markers before differentiation.
    pub marker_window: usize,
    /// Window (frames, odd) applied to heel and toe tracks for event detection.
    pub event_window: usize,
    /// Longest marker gap repaired (frames).
    pub max_gap: usize,
    pub thresholds: EventThresholds,
    /// Plate contact threshold as a fraction of body weight.
    pub contact_threshold_bw: f64,
    /// Largest COP distance from a foot's heel-toe line for the foot to own the contact (m).
    pub cop_margin_m: f64,
    /// Tolerance between force-plate contact onsets and kinematic heel strikes (s).
    pub contact_tolerance_s: f64,
    pub gravity: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            marker_window: 7,
            event_window: 3,
            max_gap: DEFAULT_MAX_GAP,
            thresholds: EventThresholds::default(),
            contact_threshold_bw: 0.05,
            cop_margin_m: 0.15,
            contact_tolerance_s: 0.05,
            gravity: Constants::default().gravity,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, w) in [("marker_window", self.marker_window), ("event_window", self.event_window)] {
            if w == 0 || w % 2 == 0 {
                return Err(format!("{name} must be odd and positive, got {w}"));
            }
        }
        self.thresholds.validate().map_err(|e| e.to_string())?;
        for (name, v) in [
            ("contact_threshold_bw", self.contact_threshold_bw),
            ("cop_margin_m", self.cop_margin_m),
            ("contact_tolerance_s", self.contact_tolerance_s),
            ("gravity", self.gravity),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

/// Shared reference data.
#[derive(Debug, Clone, Copy)]
pub struct References<'a> {
    pub schema: &'a MarkerSchema,
    pub table: &'a AnthropometricTable,
    pub calibration: &'a CalibrationCurve,
}

/// Everything computed for one trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialAnalysis {
    pub participant: Participant,
    pub terrain: Terrain,
    pub sand_depth_cm: Option<f64>,
    /// Sand transmission ratio applied to the plate's vertical force.
    pub zeta: f64,
    pub times: Vec<f64>,
    pub lengths: BTreeMap<Side, SegmentLengths>,
    pub params: BTreeMap<Side, LegParams>,
    pub angles: BTreeMap<Side, JointAngleSeries>,
    pub events: GaitEvents,
    /// Per-frame load source of each leg.
    pub frame_loads: BTreeMap<Side, Vec<FrameLoad>>,
    /// Moments for every frame; rows whose load is unknown are meaningless
    /// and are dropped by the writers.
    pub moments: BTreeMap<Side, JointMomentSeries>,
    pub com: Vec<Vec3>,
    pub strides: Vec<StrideMetrics>,
    pub peaks: Vec<(Side, f64, PeakAngles)>,
    /// Stride whose stance was recorded by the plate: (side, HS, next HS).
    pub instrumented: Option<(Side, f64, f64)>,
    /// Stance of the instrumented stride: (HS, TO).
    pub instrumented_stance: Option<(f64, f64)>,
    pub grf_features: Option<GrfFeatures>,
    pub stiffness: Option<StiffnessResult>,
    pub curves: BTreeMap<String, NormalizedCurve>,
    pub is_static: bool,
    /// Anomalies that may affect the results.
    pub warnings: Vec<String>,
    /// Informational notes about how the trial was processed.
    pub flags: Vec<String>,
}

impl TrialAnalysis {
    pub fn moments_known(&self, side: Side, i: usize) -> bool {
        self.frame_loads[&side][i] != FrameLoad::Unknown
    }
}

/// Run the full analysis on a loaded trial.
pub fn analyze_trial(record: &TrialRecord, refs: References<'_>, config: &AnalysisConfig) -> Result<TrialAnalysis, Error> {
    config.validate().map_err(|e| crate::ingest::IngestError::Meta(format!("configuration: {e}")))?;
    let mut warnings = Vec::new();
    let mut flags = Vec::new();
    let participant = record.participant.clone();
    let constants = Constants::new(config.gravity)?;
    let g = constants.gravity;
    let body_weight = participant.weight(&constants);

    // Gap repair, then both streams onto the marker timeline.
    let filled = fill_gaps(&record.markers, config.max_gap);
    let (before, after) = (record.markers.missing_count(), filled.missing_count());
    if before > 0 {
        flags.push(format!("repaired {} of {before} missing marker samples", before - after));
    }
    let aligned = align_streams(&TrialRecord {
        markers: filled,
        ..record.clone()
    })?;
    if aligned.first_frame > 0 || aligned.markers.len() < record.markers.len() {
        flags.push(format!(
            "analysis restricted to {} of {} marker frames inside the force-plate span",
            aligned.markers.len(),
            record.markers.len()
        ));
    }

    let zeta = match (record.terrain, record.sand_depth_cm) {
        (Terrain::Sand, Some(d)) => refs.calibration.zeta_at(d)?,
        (Terrain::Sand, None) => {
            return Err(crate::ingest::IngestError::Meta("sand trial without sand_depth_cm".into()).into())
        }
        (Terrain::Solid, _) => 1.0,
    };

    let markers = &aligned.markers;
    let times = markers.times().to_vec();
    let mut lengths = BTreeMap::new();
    let mut params = BTreeMap::new();
    let mut legs = BTreeMap::new();
    let mut angles = BTreeMap::new();
    for side in Side::BOTH {
        let l = measure_segment_lengths(markers, refs.schema, side)?;
        let p = segment_parameters(&participant, refs.table, &l)?;
        let leg = segment_states(markers, refs.schema, side, &p, config.marker_window)?;
        angles.insert(side, joint_angles(&leg));
        lengths.insert(side, l);
        params.insert(side, p);
        legs.insert(side, leg);
    }
    let pelvis = pelvis_midpoint(markers, refs.schema, config.marker_window)?;
    let leg_refs: Vec<(&LegKinematics, &LegParams)> = Side::BOTH.iter().map(|s| (&legs[s], &params[s])).collect();
    let com = com_trajectory(&leg_refs, &pelvis, participant.mass_kg)?;

    let (events, is_static) = match detect_gait_events(markers, refs.schema, config.event_window, &config.thresholds) {
        Ok(ev) => (ev, false),
        Err(SegmentationError::NoEvents(side)) => {
            let xs = pelvis.iter().map(|p| p.x);
            let range = xs.clone().fold(f64::NEG_INFINITY, f64::max) - xs.fold(f64::INFINITY, f64::min);
            if range > STATIC_PELVIS_RANGE_M {
                return Err(SegmentationError::NoEvents(side).into());
            }
            flags.push("static trial: no gait events, both feet treated as loaded throughout".into());
            (GaitEvents::default(), true)
        }
        Err(e) => return Err(e.into()),
    };

    // Plate samples with the sand layer undone.
    let plate: Vec<PlateLoad> = aligned
        .grf
        .iter()
        .map(|s| PlateLoad::from_sample(s, &record.plate_origin, zeta))
        .collect();
    let fz_plate: Vec<f64> = plate.iter().map(|p| p.reaction.z).collect();
    if !is_static {
        let onsets = contact_onsets(&times, &fz_plate, body_weight, config.contact_threshold_bw);
        warnings.extend(cross_check_contacts(&events, &onsets, config.contact_tolerance_s));
    }

    let feet: BTreeMap<Side, FootLine> = Side::BOTH
        .iter()
        .map(|&s| Ok((s, FootLine::new(markers, refs.schema, s, config.event_window)?)))
        .collect::<Result<_, crate::kinematics::KinematicsError>>()?;
    let owners = attribution::plate_owners(&plate, &feet, body_weight * config.contact_threshold_bw, config.cop_margin_m);

    let mut frame_loads = BTreeMap::new();
    let mut moments = BTreeMap::new();
    let mut dropped = 0.0f64;
    for side in Side::BOTH {
        let fl = attribution::frame_loads(&times, events.side(side), is_static, &owners, side);
        let leg = &legs[&side];
        let p = &params[&side];
        let loads: Vec<(f64, ExternalLoad)> = (0..times.len())
            .map(|i| {
                let load = match fl[i] {
                    FrameLoad::Plate => {
                        let f = &leg.foot[i];
                        let toe = f.proximal + p.foot.length * f.e;
                        dropped = dropped.max(plate[i].free_moment.x.abs()).max(plate[i].free_moment.z.abs());
                        ExternalLoad::new(plate[i].reaction, plate[i].free_moment, plate[i].cop, toe).sagittal()
                    }
                    FrameLoad::Swing | FrameLoad::Unknown => ExternalLoad::swing(),
                };
                (times[i], load)
            })
            .collect();
        let series = leg_moment_series(leg, &loads, p, g, participant.mass_kg)?;
        if !series.divergences.is_empty() {
            warnings.push(format!(
                "{side} leg: closed-form and recursive moments disagree on {} frame-joints",
                series.divergences.len()
            ));
        }
        if !fl.iter().any(|l| *l == FrameLoad::Plate) {
            flags.push(format!("{side} foot never contacts the force plate"));
        }
        moments.insert(side, series);
        frame_loads.insert(side, fl);
    }
    log::debug!("largest non-sagittal free-moment component dropped: {dropped:.3e} N m");

    // Strides and peak angles.
    let heel_tracks: BTreeMap<Side, Vec<Vec3>> = Side::BOTH
        .iter()
        .map(|&s| (s, feet[&s].heel.clone()))
        .collect();
    let inputs = StrideInputs {
        times: &times,
        right_heel: &heel_tracks[&Side::Right],
        left_heel: &heel_tracks[&Side::Left],
        com: &com,
        pelvis: &pelvis,
    };
    let mut strides = Vec::new();
    let mut peaks = Vec::new();
    let mut curves = BTreeMap::new();
    if !is_static {
        for side in Side::BOTH {
            match stride_metrics(&events, side, &inputs, &participant) {
                Ok(s) => strides.extend(s),
                Err(e) => flags.push(format!("{side} strides: {e}")),
            }
        }
        for s in &strides {
            let a = &angles[&s.side];
            let norm = |v: &[f64]| phase_normalize(&times, v, (s.start_s, s.end_s), PhaseKind::Cycle);
            peaks.push((s.side, s.start_s, peak_angles(&norm(&a.hip)?, &norm(&a.knee)?, &norm(&a.ankle)?)));
        }
    }

    // The instrumented stride: the first stride whose stance the plate recorded.
    let mut instrumented = None;
    let mut instrumented_stance = None;
    for side in Side::BOTH {
        for iv in stance_intervals(events.side(side), times[0], times[times.len() - 1]) {
            let (Some(hs), Some(to)) = (iv.heel_strike, iv.toe_off) else { continue };
            let on_plate = (0..times.len())
                .any(|i| times[i] >= hs && times[i] <= to && frame_loads[&side][i] == FrameLoad::Plate);
            if !on_plate {
                continue;
            }
            if instrumented_stance.map_or(true, |(h, _)| hs < h) {
                instrumented_stance = Some((hs, to));
                instrumented = events.side(side).heel_strike_after(to).map(|next| (side, hs, next));
            }
        }
    }

    let mut grf_features = None;
    if let Some((hs, to)) = instrumented_stance {
        let full: Vec<PlateLoad> = aligned
            .grf_full
            .iter()
            .map(|s| PlateLoad::from_sample(s, &record.plate_origin, zeta))
            .collect();
        let ft: Vec<f64> = aligned.grf_full.iter().map(|s| s.time).collect();
        let fx: Vec<f64> = full.iter().map(|p| p.reaction.x / body_weight).collect();
        let fz: Vec<f64> = full.iter().map(|p| p.reaction.z / body_weight).collect();
        let cx = phase_normalize(&ft, &fx, (hs, to), PhaseKind::Stance)?;
        let cz = phase_normalize(&ft, &fz, (hs, to), PhaseKind::Stance)?;
        let features = extract_grf_features(&cx.values, &cz.values);
        if features.hump2_missing {
            flags.push("vertical GRF has a single hump".into());
        }
        grf_features = Some(features);
        curves.insert("grf_fx_bw".into(), cx);
        curves.insert("grf_fz_bw".into(), cz);
    }

    let mut stiffness = None;
    if let Some((side, hs, next)) = instrumented {
        let m = &moments[&side];
        let a = &angles[&side];
        for joint in Joint::ALL {
            let values = m.normalized(joint);
            curves.insert(
                format!("{side}_{joint}_moment_nmkg"),
                phase_normalize(&times, &values, (hs, next), PhaseKind::Cycle)?,
            );
        }
        for (name, v) in [("hip", &a.hip), ("knee", &a.knee), ("ankle", &a.ankle)] {
            curves.insert(
                format!("{side}_{name}_angle_deg"),
                phase_normalize(&times, v, (hs, next), PhaseKind::Cycle)?,
            );
        }
        if side == Side::Right {
            let known: Vec<usize> = (0..times.len()).filter(|&i| frame_loads[&side][i] != FrameLoad::Unknown).collect();
            let pick = |v: &[f64]| known.iter().map(|&i| v[i]).collect::<Vec<f64>>();
            let r = knee_stiffness(&pick(&times), &pick(&a.knee), &pick(&m.normalized(Joint::Knee)), &events, hs)?;
            for fit in [&r.k_f, &r.k_e, &r.k_swing] {
                if let crate::metrics::FitOutcome::Failed { label, reason } = fit {
                    flags.push(format!("knee stiffness {label}: {reason}"));
                }
            }
            stiffness = Some(r);
        } else {
            flags.push("knee stiffness is defined on the right stride; the plate recorded a left stance".into());
        }
    } else if !is_static {
        flags.push("no complete stride with a force-plate stance".into());
    }

    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(TrialAnalysis {
        participant,
        terrain: record.terrain,
        sand_depth_cm: record.sand_depth_cm,
        zeta,
        times,
        lengths,
        params,
        angles,
        events,
        frame_loads,
        moments,
        com,
        strides,
        peaks,
        instrumented,
        instrumented_stance,
        grf_features,
        stiffness,
        curves,
        is_static,
        warnings,
        flags,
    })
}

/// Aligned plate sample in lab terms, vertical force corrected for sand.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PlateLoad {
    pub reaction: Vec3,
    pub free_moment: Vec3,
    pub cop: Vec3,
}

impl PlateLoad {
    fn from_sample(s: &crate::ingest::GrfSample, origin: &Vec3, zeta: f64) -> Self {
        // The free moment comes from the raw plate reading, before the
        // vertical force is rescaled.
        let free_moment = s.free_moment();
        let mut reaction = s.force;
        reaction.z /= zeta;
        PlateLoad {
            reaction,
            free_moment,
            cop: s.cop_lab(origin),
        }
    }
}

/// Filtered heel and toe marker tracks of one foot.
#[derive(Debug, Clone)]
pub(crate) struct FootLine {
    pub heel: Vec<Vec3>,
    pub toe: Vec<Vec3>,
}

impl FootLine {
    fn new(
        markers: &crate::ingest::MarkerSeries,
        schema: &MarkerSchema,
        side: Side,
        window: usize,
    ) -> Result<Self, crate::kinematics::KinematicsError> {
        Ok(FootLine {
            heel: filter_track(&complete_track(markers, schema.heel(side))?, window)?,
            toe: filter_track(&complete_track(markers, schema.toe(side))?, window)?,
        })
    }
}
