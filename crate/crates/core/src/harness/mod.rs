//! Scenario ingestion, batch simulation, protection metrics, and report
//! persistence.
//!
//! A scenario file scripts one world: the photo, annotated faces with
//! ground-truth roles, nearby agents with request policies, and the network
//! and seed parameters. The runner executes the scripted session any number
//! of times with per-session derived seeds and computes the session-level
//! protection metrics from the resulting reports.

mod datafile;
mod metrics;
mod pipeline;
mod report;
mod runner;
mod scenario;
mod sweep;

pub use datafile::{
    load_dataset, load_train_config, parse_dataset, parse_train_config, save_dataset,
    write_dataset, TrainFileConfig,
};
pub use metrics::{false_filtering_rate, false_protection_rate, true_protection_rate};
pub use pipeline::predict_face;
pub use report::{load_report, save_report, OutcomeFlags, SessionReport};
pub use runner::{derive_seed, run_scenario, run_scenario_to_dir, write_summary};
pub use scenario::{
    load_scenario, parse_scenario_str, AgentSpec, FaceAnnotation, NearbySpec, Scenario,
    ScenarioSeeds,
};
pub use sweep::{load_sweep_batch, threshold_sweep, SweepBatch, SweepRow, SweepTrial};

use thiserror::Error;

use crate::abcnn::AbcnnError;
use crate::attributes::AttributeError;
use crate::facegeom::{GeomError, ImageError};
use crate::protocol::ProtocolError;
use crate::target_filter::TargetFilterError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("scenario invalid: {0}")]
    Invalid(String),
    #[error("no reports to aggregate")]
    EmptyReports,
    #[error("sweep batch has no trials")]
    EmptySweep,
    #[error("no thresholds requested")]
    NoThresholds,
    #[error("malformed report: {0}")]
    BadReport(String),
    #[error(transparent)]
    Attribute(#[from] AttributeError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    TargetFilter(#[from] TargetFilterError),
    #[error(transparent)]
    Classifier(#[from] AbcnnError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
