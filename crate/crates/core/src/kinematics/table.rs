use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{mean_speed, range_of_motion, workspace_volume, RomResult, SpeedResult, WorkspaceResult};
use crate::session::{
    extract_trajectory, fill_gaps, JointId, LevelId, LevelSegmentation, PoseSample, DEFAULT_MAX_GAP_S,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsConfig {
    pub max_gap: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { max_gap: DEFAULT_MAX_GAP_S }
    }
}

/// One (level, joint) cell. Failed metrics carry the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub level: LevelId,
    pub joint: JointId,
    pub speed: Result<SpeedResult, String>,
    pub rom: Result<RomResult, String>,
    pub workspace: Result<WorkspaceResult, String>,
    pub gaps_split: usize,
    pub samples_interpolated: usize,
}

impl MetricsRow {
    /// Flags for the CSV `flags` column.
    pub fn flags(&self) -> Vec<String> {
        let mut f = Vec::new();
        if let Ok(s) = &self.speed {
            if s.n_excluded > 0 {
                f.push(alloc::format!("excluded_intervals={}", s.n_excluded));
            }
        }
        if let Ok(w) = &self.workspace {
            if w.degenerate {
                f.push("degenerate".to_string());
            }
        }
        if self.gaps_split > 0 {
            f.push(alloc::format!("gaps_split={}", self.gaps_split));
        }
        if self.samples_interpolated > 0 {
            f.push(alloc::format!("interpolated={}", self.samples_interpolated));
        }
        for (name, err) in [
            ("speed", self.speed.as_ref().err()),
            ("rom", self.rom.as_ref().err()),
            ("volume", self.workspace.as_ref().err()),
        ] {
            if let Some(e) = err {
                f.push(alloc::format!("{name}_error={e}"));
            }
        }
        f
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn get(&self, level: LevelId, joint: &JointId) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.level == level && &r.joint == joint)
    }
}

/// Speed, range of motion and workspace volume for every (level, joint),
/// in segmentation order then joint order.
pub fn level_metrics(
    samples: &[PoseSample],
    segmentation: &LevelSegmentation,
    joints: &[JointId],
    config: MetricsConfig,
) -> MetricsTable {
    let mut rows = Vec::new();
    for w in &segmentation.windows {
        for joint in joints {
            let row = match extract_trajectory(samples, joint, w.window()) {
                Ok(traj) => {
                    let (traj, report) = fill_gaps(&traj, config.max_gap);
                    MetricsRow {
                        level: w.level,
                        joint: joint.clone(),
                        speed: mean_speed(&traj).map_err(|e| e.to_string()),
                        rom: Ok(range_of_motion(&traj)),
                        workspace: workspace_volume(&traj).map_err(|e| e.to_string()),
                        gaps_split: report.split.len(),
                        samples_interpolated: report.interpolated_samples,
                    }
                }
                Err(e) => {
                    let reason = e.to_string();
                    MetricsRow {
                        level: w.level,
                        joint: joint.clone(),
                        speed: Err(reason.clone()),
                        rom: Err(reason.clone()),
                        workspace: Err(reason),
                        gaps_split: 0,
                        samples_interpolated: 0,
                    }
                }
            };
            rows.push(row);
        }
    }
    MetricsTable { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;

    #[test]
    fn stationary_stream_is_all_zero() {
        let samples: Vec<PoseSample> = (0..500)
            .map(|i| {
                let mut s = PoseSample::new(i as f64 * 0.02);
                for (k, j) in JointId::CORE.iter().enumerate() {
                    s.joints.insert(j.clone(), Vec3::new(k as f64 * 0.1, 0.0, -0.3));
                }
                s
            })
            .collect();
        let seg = LevelSegmentation::consecutive(&[LevelId::L1], 0.0, 10.0);
        let t = level_metrics(&samples, &seg, &JointId::CORE, MetricsConfig::default());
        assert_eq!(t.rows.len(), 6);
        for r in &t.rows {
            assert_eq!(r.speed.as_ref().unwrap().mean_speed, 0.0);
            assert_eq!(r.rom.as_ref().unwrap().rom, 0.0);
            assert_eq!(r.workspace.as_ref().unwrap().volume, 0.0);
        }
    }

    #[test]
    fn missing_joint_is_an_empty_cell() {
        let samples = [PoseSample::new(0.0).with(JointId::LeftHand, Vec3::ZERO)];
        let seg = LevelSegmentation::consecutive(&[LevelId::L2], 0.0, 10.0);
        let t = level_metrics(&samples, &seg, &[JointId::RightHand], MetricsConfig::default());
        assert!(t.rows[0].speed.is_err());
        assert!(t.rows[0].flags().iter().any(|f| f.starts_with("speed_error=")));
    }
}
