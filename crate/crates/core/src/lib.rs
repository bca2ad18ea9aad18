//! Exergame session engine and upper-body kinematic analytics.
//!
//! The crate is `no_std` and only needs an allocator. It covers the whole
//! pipeline on in-memory data:
//!
//! - [`session`]: pose samples, per-joint trajectories, windows and gap filling.
//! - [`game`]: boundary calibration, level scripts on the beat grid, hit detection.
//! - [`kinematics`]: mean speed, range of motion, convex-hull workspace volume.
//! - [`tracking`]: time association, frame registration and absolute pose error.
//! - [`stats`]: repeated-measures ANOVA, Friedman, Bonferroni post-hoc tests.
//! - [`synth`]: parametric synthetic patients driving the other modules.
//!
//! File formats, the CLI and report generation live in the `mobility-kit` crate.

#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod game;
pub mod kinematics;
pub mod math;
pub mod session;
pub mod stats;
pub mod synth;
pub mod tracking;

pub use math::Vec3;
pub use session::{JointId, JointTrajectory, LevelId, PoseSample};
