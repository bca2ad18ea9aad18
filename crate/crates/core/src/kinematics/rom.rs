use alloc::vec::Vec;

use crate::math::{centroid, sqrt, Vec3};
use crate::session::{JointId, JointTrajectory};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RomResult {
    pub joint: JointId,
    pub centroid: Vec3,
    /// m
    pub rom: f64,
}

/// Range of motion as the root-mean-square distance of the positions from
/// their centroid, `sqrt(1/N * sum |p_i - c|^2)`.
///
/// The formula is sometimes typeset with the sum inside the norm; that form
/// vanishes identically at the centroid, so the dispersion reading is used.
pub fn range_of_motion(traj: &JointTrajectory) -> RomResult {
    let points: Vec<Vec3> = traj.positions().collect();
    let c = centroid(&points).unwrap_or(Vec3::ZERO);
    let ms = points.iter().map(|&p| (p - c).norm_squared()).sum::<f64>() / points.len().max(1) as f64;
    RomResult { joint: traj.joint.clone(), centroid: c, rom: sqrt(ms) }
}
