use super::KinematicsError;
use crate::session::{JointId, JointTrajectory};

/// Intervals whose spacing differs from nominal by more than this fraction
/// are left out of the mean.
pub const MAX_INTERVAL_DEVIATION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpeedResult {
    pub joint: JointId,
    /// m/s
    pub mean_speed: f64,
    pub n_intervals: usize,
    /// Intervals dropped for irregular spacing.
    pub n_excluded: usize,
}

/// Mean of the instantaneous speeds `|p_i - p_{i-1}| / (t_i - t_{i-1})`
/// over consecutive samples. Intervals that cross a segment split are skipped.
pub fn mean_speed(traj: &JointTrajectory) -> Result<SpeedResult, KinematicsError> {
    let nominal = 1.0 / traj.nominal_rate;
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut excluded = 0usize;
    for i in 1..traj.samples.len() {
        if traj.starts_segment(i) {
            continue;
        }
        let (a, b) = (traj.samples[i - 1], traj.samples[i]);
        let dt = b.t - a.t;
        if crate::math::abs(dt - nominal) > MAX_INTERVAL_DEVIATION * nominal {
            excluded += 1;
            continue;
        }
        sum += a.p.distance(b.p) / dt;
        n += 1;
    }
    if n == 0 {
        return Err(KinematicsError::InsufficientSamples { usable: 0 });
    }
    Ok(SpeedResult {
        joint: traj.joint.clone(),
        mean_speed: sum / n as f64,
        n_intervals: n,
        n_excluded: excluded,
    })
}
