//! Marker filtering, numerical differentiation, segment states, sagittal
//! joint angles and the whole-body COM estimate.
//!
//! All rotational quantities live in the lab X-Z plane: segment directions are
//! projected onto it and angular rates are about the lab Y axis.

mod angles;
mod com;
mod filter;
mod segments;

use thiserror::Error;

pub use angles::{ankle_angle, hip_angle, joint_angles, knee_angle, pitch, wrap_deg, JointAngleSeries};
pub use com::{com_trajectory, pelvis_midpoint};
pub use filter::{differentiate, moving_average};
pub use segments::{
    differentiate_track, filter_track, measure_segment_lengths, segment_states, single_segment_states,
    LegKinematics, SegmentState, MIN_SEGMENT_LENGTH,
};

pub(crate) use segments::complete_track;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("{0}")]
    Parameter(String),
    #[error("{0}")]
    Config(String),
    #[error("marker `{label}` missing at t={time} s")]
    MissingMarker { label: String, time: f64 },
    #[error("singular segment {segment} at t={time} s (markers closer than 1 mm in the sagittal plane)")]
    Singular { segment: String, time: f64 },
}

impl KinematicsError {
    /// Whether the failure stems from inputs or configuration.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, KinematicsError::Singular { .. })
    }
}
