//! Heel-strike / toe-off detection and phase normalization.

mod events;
mod phase;

use thiserror::Error;

pub use events::{
    contact_onsets, cross_check_contacts, detect_events, detect_gait_events, EventThresholds, GaitEvents,
    SideEvents, write_event_table,
};
pub(crate) use phase::interp;
pub use phase::{phase_normalize, stance_swing_durations, NormalizedCurve, PhaseKind, StepTiming, GRID_POINTS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentationError {
    #[error("no gait events found on the {0} side")]
    NoEvents(String),
    #[error("events do not alternate: {0}")]
    Alternation(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("{0}")]
    Parameter(String),
}
