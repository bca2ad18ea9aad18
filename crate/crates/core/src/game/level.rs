use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::GameError;
use crate::session::{LevelId, LevelSegmentation};

/// Mobility challenge emphasised by a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MovementType {
    Wrist,
    Lateral,
    Bilateral,
    Overhead,
}

impl MovementType {
    pub fn as_str(self) -> &'static str {
        match self {
            MovementType::Wrist => "Wrist",
            MovementType::Lateral => "Lateral",
            MovementType::Bilateral => "Bilateral",
            MovementType::Overhead => "Overhead",
        }
    }
}

impl fmt::Display for MovementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MovementType {
    type Err = GameError;
    fn from_str(s: &str) -> Result<Self, GameError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wrist" => Ok(MovementType::Wrist),
            "lateral" => Ok(MovementType::Lateral),
            "bilateral" => Ok(MovementType::Bilateral),
            "overhead" => Ok(MovementType::Overhead),
            _ => Err(GameError::InvalidSpec(format!("unknown movement type {s:?}"))),
        }
    }
}

/// Tempo, movement family and hold range of one level.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelSpec {
    pub id: LevelId,
    pub bpm: f64,
    pub movement_type: MovementType,
    /// Inclusive hold-duration range in seconds.
    pub hold_range: (f64, f64),
    pub duration: f64,
}

impl LevelSpec {
    pub const DEFAULT_DURATION_S: f64 = 120.0;

    /// Default parameters of the four levels.
    pub fn default_for(id: LevelId) -> LevelSpec {
        let (bpm, movement_type, hold_range) = match id {
            LevelId::L1 => (77.0, MovementType::Wrist, (4.0, 6.0)),
            LevelId::L2 => (105.0, MovementType::Lateral, (6.0, 8.0)),
            LevelId::L3 => (112.0, MovementType::Bilateral, (8.0, 10.0)),
            LevelId::L4 => (140.0, MovementType::Overhead, (10.0, 12.0)),
        };
        LevelSpec { id, bpm, movement_type, hold_range, duration: Self::DEFAULT_DURATION_S }
    }

    pub fn defaults() -> [LevelSpec; 4] {
        LevelId::ALL.map(LevelSpec::default_for)
    }

    /// Seconds per beat.
    pub fn beat(&self) -> f64 {
        60.0 / self.bpm
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let (lo, hi) = self.hold_range;
        if !(self.bpm.is_finite() && self.bpm > 0.0) {
            return Err(GameError::InvalidSpec(format!("{}: bpm must be positive", self.id)));
        }
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(GameError::InvalidSpec(format!(
                "{}: hold range ({lo}, {hi}) must satisfy 0 < min <= max",
                self.id
            )));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(GameError::InvalidSpec(format!("{}: duration must be >= 0", self.id)));
        }
        Ok(())
    }

    /// Hold durations available to the level, `min, min + 1, ...` up to `max`.
    pub fn hold_steps(&self) -> Vec<f64> {
        let (lo, hi) = self.hold_range;
        let n = crate::math::floor(hi - lo + 1e-9) as usize + 1;
        (0..n).map(|i| lo + i as f64).collect()
    }
}

/// A full session: an untargeted tutorial segment, then levels in order.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionPlan {
    pub tutorial_s: f64,
    pub levels: Vec<LevelSpec>,
}

impl Default for SessionPlan {
    fn default() -> Self {
        SessionPlan { tutorial_s: 0.0, levels: LevelSpec::defaults().to_vec() }
    }
}

impl SessionPlan {
    /// Start time of each level in session time.
    pub fn level_starts(&self) -> Vec<f64> {
        let mut t = self.tutorial_s;
        self.levels
            .iter()
            .map(|l| {
                let s = t;
                t += l.duration;
                s
            })
            .collect()
    }

    pub fn total_duration(&self) -> f64 {
        self.tutorial_s + self.levels.iter().map(|l| l.duration).sum::<f64>()
    }

    pub fn segmentation(&self) -> LevelSegmentation {
        let windows = self
            .levels
            .iter()
            .zip(self.level_starts())
            .map(|(l, s)| crate::session::LevelWindow { level: l.id, start_t: s, end_t: s + l.duration })
            .collect();
        LevelSegmentation { windows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_levels() {
        let d = LevelSpec::defaults();
        let got: Vec<_> = d
            .iter()
            .map(|s| (s.bpm, s.movement_type, s.hold_range, s.duration))
            .collect();
        assert_eq!(
            got,
            [
                (77.0, MovementType::Wrist, (4.0, 6.0), 120.0),
                (105.0, MovementType::Lateral, (6.0, 8.0), 120.0),
                (112.0, MovementType::Bilateral, (8.0, 10.0), 120.0),
                (140.0, MovementType::Overhead, (10.0, 12.0), 120.0),
            ]
        );
        assert_eq!(d[0].hold_steps(), [4.0, 5.0, 6.0]);
    }

    #[test]
    fn spec_validation() {
        let mut s = LevelSpec::default_for(LevelId::L2);
        assert!(s.validate().is_ok());
        s.hold_range = (7.0, 6.0);
        assert!(s.validate().is_err());
        s.hold_range = (6.0, 8.0);
        s.bpm = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn plan_segmentation() {
        let plan = SessionPlan { tutorial_s: 10.0, ..Default::default() };
        let seg = plan.segmentation();
        assert_eq!(seg.windows.len(), 4);
        assert_eq!(seg.windows[0].start_t, 10.0);
        assert_eq!(seg.windows[3].end_t, 490.0);
    }
}
