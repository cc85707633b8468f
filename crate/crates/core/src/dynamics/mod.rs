//! Sagittal inverse dynamics of the foot-shank-thigh chain and a synthetic
//! gait generator used as a verification oracle.
//!
//! The production path is a recursive Newton-Euler pass (foot, then shank,
//! then thigh). Closed-form expressions for the ankle, knee and hip moments
//! are evaluated alongside it as an independent check; see [`closed_form`].

pub mod closed_form;
mod jet;
mod load;
mod recursive;
mod series;
pub mod synth;

use thiserror::Error;

pub use jet::Jet;
pub use load::{transfer_to_distal, ExternalLoad};
pub use recursive::{recursive_leg_dynamics, JointLoad, LegJointLoads};
pub use series::{
    clinical_moments, leg_inverse_dynamics, leg_moment_series, relative_difference, Divergence, FrameDynamics,
    JointMomentSeries, LegFrame, SegmentFrame, DIVERGENCE_TOLERANCE,
    write_moment_table,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("infeasible profile: {0}")]
    Generation(String),
}

/// Ankle joint force and moment from the closed form (the foot balance alone).
pub fn ankle_dynamics(
    load: &ExternalLoad,
    foot: &crate::kinematics::SegmentState,
    params_f: &crate::model::SegmentParams,
    g: f64,
) -> (crate::Vec3, crate::Vec3) {
    let frame = SegmentFrame::from(foot);
    (
        closed_form::ankle_force(load, &frame, params_f, g),
        closed_form::ankle_moment(load, &frame, params_f, g),
    )
}
