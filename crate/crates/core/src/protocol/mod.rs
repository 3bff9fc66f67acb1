//! The cooperative photographer/stranger protocol over a seeded
//! discrete-event network.
//!
//! A capture broadcasts notices to nearby agents; willing agents answer with
//! blur requests carrying their attribute profiles; when the collection
//! window closes the photographer filters targets, matches requests against
//! detected faces, and blurs every matched non-target face.

mod agent;
mod message;
mod run;
mod session;
mod simnet;

pub use agent::{Policy, StrangerAgent};
pub use message::{MessageKind, ProtoMessage};
pub use run::{run_session, Disposition, LoggedMessage, ProtocolRun, SessionSetup};
pub use session::{
    apply_blur_plan, BlurPlan, BlurPlanEntry, MatchRecord, PhotographerSession, RequestOutcome,
    SessionState, SigmaPolicy,
};
pub use simnet::{Endpoint, Event, LatencyModel, MessageCounters, NetConfig, SimNet};

use thiserror::Error;

use crate::attributes::AttributeError;
use crate::facegeom::GeomError;
use crate::target_filter::TargetFilterError;

/// Default collection window in simulated milliseconds.
pub const DEFAULT_WINDOW_MS: u64 = 500;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("session {0} already captured a photo")]
    SessionReused(String),
    #[error("session {0} already finalized")]
    DoubleFinalize(String),
    #[error("session {0} is not collecting")]
    NotCollecting(String),
    #[error("blur plan references unknown face `{0}`")]
    UnknownFace(String),
    #[error("duplicate agent id `{0}`")]
    DuplicateAgent(String),
    #[error("drop probability must be within [0, 1], got {0}")]
    BadDropProbability(f64),
    #[error("latency range inverted: min {min} > max {max}")]
    BadLatency { min: u64, max: u64 },
    #[error("request policy probability must be within [0, 1], got {0}")]
    BadPolicyProbability(f64),
    #[error("malformed wire line `{0}`")]
    BadWireLine(String),
    #[error(transparent)]
    Attribute(#[from] AttributeError),
    #[error(transparent)]
    TargetFilter(#[from] TargetFilterError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}
