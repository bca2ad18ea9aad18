use alloc::vec::Vec;

use super::{convex_hull, HullOutcome, KinematicsError};
use crate::math::Vec3;
use crate::session::{JointId, JointTrajectory};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WorkspaceResult {
    pub joint: JointId,
    /// m^3
    pub volume: f64,
    /// Set when the positions span fewer than three dimensions; volume is then 0.
    pub degenerate: bool,
    pub hull_vertices: usize,
}

/// Convex-hull volume of the joint's positions.
pub fn workspace_volume(traj: &JointTrajectory) -> Result<WorkspaceResult, KinematicsError> {
    let points: Vec<Vec3> = traj.positions().collect();
    workspace_volume_of(traj.joint.clone(), &points)
}

pub fn workspace_volume_of(joint: JointId, points: &[Vec3]) -> Result<WorkspaceResult, KinematicsError> {
    Ok(match convex_hull(points)? {
        HullOutcome::Solid(h) => WorkspaceResult {
            joint,
            volume: h.volume(),
            degenerate: false,
            hull_vertices: h.vertices.len(),
        },
        HullOutcome::Degenerate { .. } => {
            WorkspaceResult { joint, volume: 0.0, degenerate: true, hull_vertices: 0 }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_tetrahedron() {
        let pts = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let r = workspace_volume_of(JointId::LeftHand, &pts).unwrap();
        assert!((r.volume - 1.0 / 6.0).abs() < 1e-12);
        assert!(!r.degenerate);
    }

    #[test]
    fn planar_motion_is_zero_volume() {
        let pts: Vec<Vec3> = (0..50).map(|i| Vec3::new(i as f64 * 0.01, (i % 7) as f64 * 0.01, 0.2)).collect();
        let t = JointTrajectory::from_positions(JointId::RightHand, &pts, 50.0).unwrap();
        let r = workspace_volume(&t).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.volume, 0.0);
    }
}
