//! Gait biomechanics analysis engine.
//!
//! The crate turns synchronized motion-capture marker trajectories (100 Hz)
//! and force-plate records (1000 Hz) into sagittal joint angles, joint
//! moments, ground-reaction-force features, stride metrics, knee stiffness
//! estimates and paired terrain comparisons.
//!
//! Module map:
//!
//! - [`model`]: anthropometric scaling of a participant into segment parameters.
//! - [`ingest`]: trial file parsing, gap repair and stream alignment.
//! - [`kinematics`]: filtering, differentiation, segment states, joint angles, COM.
//! - [`gaitseg`]: heel-strike / toe-off detection and phase normalization.
//! - [`forces`]: sand-layer calibration, weight normalization, GRF features.
//! - [`dynamics`]: sagittal inverse dynamics and the synthetic gait generator.
//! - [`metrics`]: stride metrics, peak angles, knee stiffness, paired statistics.
//! - [`pipeline`]: end-to-end trial analysis used by the command-line front end.

pub mod dynamics;
pub mod forces;
pub mod gaitseg;
pub mod ingest;
pub mod kinematics;
pub mod metrics;
pub mod model;
pub mod pipeline;

mod error;
mod types;

pub use error::Error;
pub use types::{Joint, Side, Terrain, Vec3};

pub use dynamics::{ExternalLoad, JointMomentSeries};
pub use forces::{CalibrationCurve, GrfFeatures};
pub use gaitseg::{GaitEvents, NormalizedCurve, SideEvents};
pub use ingest::{GrfSample, MarkerFrame, MarkerSchema, MarkerSeries, TrialMeta, TrialRecord};
pub use kinematics::{JointAngleSeries, SegmentState};
pub use metrics::{ComparisonReport, StiffnessResult, StrideMetrics};
pub use model::{AnthropometricTable, Constants, LegParams, Participant, SegmentKind, SegmentParams};
