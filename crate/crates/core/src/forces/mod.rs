//! Ground-reaction-force conditioning: sand-layer calibration, body-weight
//! normalization and scalar stance features.
//!
//! Only the vertical component is calibrated; the longitudinal component is
//! passed through unchanged and reported as uncalibrated.

mod calibration;
mod features;

use thiserror::Error;

pub use calibration::{
    calibrate_grf, decalibrate_grf, fit_calibration, parse_calibration_samples, CalibrationCurve, CalibrationPoint,
    CalibrationSample, DEFAULT_CALIBRATION,
};
pub use features::{extract_grf_features, local_maxima, GrfFeatures};

use crate::model::{Constants, Participant};
use crate::types::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForcesError {
    #[error("no samples")]
    NoSamples,
    #[error("calibration fit at depth {depth} cm: {reason}")]
    Fit { depth: f64, reason: String },
    #[error("calibration curve: {0}")]
    Curve(String),
    #[error("depth {depth} cm is outside the calibrated range [0, {max}] cm; refusing to extrapolate")]
    Extrapolation { depth: f64, max: f64 },
    #[error("{source_name} line {line}: {reason}")]
    Format {
        source_name: String,
        line: u64,
        reason: String,
    },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

impl ForcesError {
    /// Every forces failure traces back to calibration data or configuration.
    pub fn is_input_error(&self) -> bool {
        true
    }
}

/// Forces in body-weight units: `F / (m g)`.
pub fn normalize_grf(force: &[f64], participant: &Participant, constants: &Constants) -> Vec<f64> {
    let w = participant.weight(constants);
    force.iter().map(|f| f / w).collect()
}

pub fn normalize_grf_vec(force: &[Vec3], participant: &Participant, constants: &Constants) -> Vec<Vec3> {
    let w = participant.weight(constants);
    force.iter().map(|f| f / w).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn body_weight_units() {
        let g = Constants::default();
        let p = Participant::new("P", 1.7, 74.5).unwrap();
        assert!((normalize_grf(&[730.845], &p, &g)[0] - 1.0).abs() < 1e-12);
        assert_eq!(normalize_grf(&[0.0], &p, &g)[0], 0.0);
        let p100 = Participant::new("Q", 1.8, 100.0).unwrap();
        assert!((normalize_grf(&[147.15], &p100, &g)[0] - 0.15).abs() < 1e-12);
        let v = normalize_grf_vec(&[Vec3::new(98.1, 0.0, 981.0)], &p100, &g);
        assert!((v[0] - Vec3::new(0.1, 0.0, 1.0)).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn linear(a in -5.0f64..5.0, f in proptest::collection::vec(-2000.0f64..2000.0, 1..20)) {
            let g = Constants::default();
            let p = Participant::new("P", 1.7, 70.0).unwrap();
            let scaled: Vec<f64> = f.iter().map(|x| a * x).collect();
            let lhs = normalize_grf(&scaled, &p, &g);
            let rhs = normalize_grf(&f, &p, &g);
            for (l, r) in lhs.iter().zip(&rhs) {
                prop_assert!((l - a * r).abs() <= 1e-12 * (1.0 + l.abs()));
            }
        }
    }
}
