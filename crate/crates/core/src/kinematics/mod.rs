//! Movement metrics per joint and level: mean speed, range of motion and
//! convex-hull workspace volume.

mod hull;
mod rom;
mod speed;
mod table;
mod workspace;

pub use hull::{convex_hull, ConvexHull3, Facet, HullError, HullOutcome, DEFAULT_HULL_EPS};
pub use rom::{range_of_motion, RomResult};
pub use speed::{mean_speed, SpeedResult};
pub use table::{level_metrics, MetricsConfig, MetricsRow, MetricsTable};
pub use workspace::{workspace_volume, workspace_volume_of, WorkspaceResult};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("insufficient samples: {usable} usable speed intervals")]
    InsufficientSamples { usable: usize },
    #[error(transparent)]
    Hull(#[from] HullError),
    #[error(transparent)]
    Session(#[from] crate::session::SessionError),
}
