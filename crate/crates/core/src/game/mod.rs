//! Deterministic exergame core: calibration, level scripts and replay.

mod boundary;
mod engine;
mod level;
mod script;

pub use boundary::{calibrate, MovementBoundary, MIN_RANGE_M};
pub use engine::{
    replay, summarize, CompletionSummary, EngineConfig, EventKind, LevelCompletion, LevelSession,
    SessionEvent, DEFAULT_CAPTURE_RADIUS_M,
};
pub use level::{LevelSpec, MovementType, SessionPlan};
pub use script::{build_level_schedule, Hand, Segment3, TargetEvent, TargetKind, TargetScript};

use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
    #[error("calibration pose is missing {0}")]
    MissingJoint(&'static str),
    #[error("invalid level spec: {0}")]
    InvalidSpec(String),
    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),
    #[error("time regression: sample at t = {t} after t = {previous}")]
    TimeRegression { t: f64, previous: f64 },
}
