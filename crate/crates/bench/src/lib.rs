//! Fixtures shared by the benchmarks.

use terragait_core::dynamics::synth::{synthesize_gait, GaitProfile, SyntheticTrial};
use terragait_core::dynamics::{ExternalLoad, LegFrame, SegmentFrame};
use terragait_core::{AnthropometricTable, CalibrationCurve, Constants, LegParams, MarkerSchema, SegmentParams, TrialRecord, Vec3};

pub fn walking_trial(duration_s: f64) -> SyntheticTrial {
    let profile = GaitProfile {
        duration_s,
        ..GaitProfile::default()
    };
    synthesize_gait(&profile, &AnthropometricTable::default(), &CalibrationCurve::default(), &Constants::default())
        .expect("default profile is feasible")
}

pub fn record(trial: &SyntheticTrial, schema: &MarkerSchema) -> TrialRecord {
    TrialRecord::new(&trial.meta, trial.markers.clone(), trial.grf.clone(), schema).expect("synthetic trial is valid")
}

/// A mid-stance frame with plausible loads.
pub fn stance_frame() -> (ExternalLoad, LegFrame, LegParams) {
    let seg = |mass: f64, length: f64| SegmentParams {
        mass,
        length,
        com_offset: 0.43 * length,
        inertia: mass * (0.3 * length).powi(2),
    };
    let params = LegParams {
        foot: seg(1.1, 0.2),
        shank: seg(3.5, 0.42),
        thigh: seg(7.5, 0.42),
    };
    let frame = |pitch: f64, acc: Vec3| SegmentFrame {
        e: Vec3::new(pitch.sin(), 0.0, -pitch.cos()),
        acc,
        omega_dot: 3.0,
    };
    let leg = LegFrame {
        foot: frame(1.45, Vec3::new(0.1, 0.0, -0.2)),
        shank: frame(-0.1, Vec3::new(0.4, 0.0, 0.3)),
        thigh: frame(0.2, Vec3::new(0.2, 0.0, -0.5)),
    };
    let load = ExternalLoad::new(
        Vec3::new(-80.0, 0.0, 700.0),
        Vec3::zeros(),
        Vec3::new(0.05, 0.0, 0.0),
        Vec3::new(0.15, 0.0, 0.02),
    );
    (load, leg, params)
}
