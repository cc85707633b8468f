use thiserror::Error;

use crate::{dynamics, forces, gaitseg, ingest, kinematics, metrics, model};

/// Umbrella error naming the module that failed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("model: {0}")]
    Model(#[from] model::ModelError),
    #[error("ingest: {0}")]
    Ingest(#[from] ingest::IngestError),
    #[error("kinematics: {0}")]
    Kinematics(#[from] kinematics::KinematicsError),
    #[error("gaitseg: {0}")]
    Segmentation(#[from] gaitseg::SegmentationError),
    #[error("forces: {0}")]
    Forces(#[from] forces::ForcesError),
    #[error("dynamics: {0}")]
    Dynamics(#[from] dynamics::DynamicsError),
    #[error("metrics: {0}")]
    Metrics(#[from] metrics::MetricsError),
}

impl Error {
    /// True for failures caused by inputs or configuration, as opposed to
    /// numerical or contract failures inside the pipeline.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Model(_) => true,
            Error::Ingest(_) => true,
            Error::Forces(e) => e.is_input_error(),
            Error::Kinematics(e) => e.is_input_error(),
            _ => false,
        }
    }
}
