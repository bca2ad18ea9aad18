//! Pose data model: joints, timestamped samples, per-joint trajectories,
//! level windows and short-gap repair.
//!
//! Positions are meters in a right-handed, Y-up frame whose origin is the
//! headset pose at session start. Timestamps are seconds since session start.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::math::{floor, Vec3};

/// Nominal headset sampling rate in Hz.
pub const NOMINAL_RATE_HZ: f64 = 50.0;

/// Gaps up to this length (seconds) are interpolated, longer ones split the trajectory.
pub const DEFAULT_MAX_GAP_S: f64 = 0.2;

/// A tracked joint. The six upper-body joints have fixed two-letter codes;
/// anything else read from a log is kept under its original name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(into = "String", from = "String"))]
pub enum JointId {
    LeftHand,
    RightHand,
    LeftElbow,
    RightElbow,
    LeftShoulder,
    RightShoulder,
    Other(String),
}

impl JointId {
    /// The six core joints in canonical order.
    pub const CORE: [JointId; 6] = [
        JointId::LeftHand,
        JointId::RightHand,
        JointId::LeftElbow,
        JointId::RightElbow,
        JointId::LeftShoulder,
        JointId::RightShoulder,
    ];

    pub fn code(&self) -> &str {
        match self {
            JointId::LeftHand => "LH",
            JointId::RightHand => "RH",
            JointId::LeftElbow => "LE",
            JointId::RightElbow => "RE",
            JointId::LeftShoulder => "LS",
            JointId::RightShoulder => "RS",
            JointId::Other(name) => name,
        }
    }

    /// Maps a serialized code back to a joint; unknown codes become [`JointId::Other`].
    pub fn from_code(code: &str) -> JointId {
        match code {
            "LH" => JointId::LeftHand,
            "RH" => JointId::RightHand,
            "LE" => JointId::LeftElbow,
            "RE" => JointId::RightElbow,
            "LS" => JointId::LeftShoulder,
            "RS" => JointId::RightShoulder,
            other => JointId::Other(other.into()),
        }
    }

    pub fn is_hand(&self) -> bool {
        matches!(self, JointId::LeftHand | JointId::RightHand)
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl From<JointId> for String {
    fn from(j: JointId) -> String {
        j.code().into()
    }
}

impl From<String> for JointId {
    fn from(s: String) -> JointId {
        JointId::from_code(&s)
    }
}

/// One of the four game levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LevelId {
    L1,
    L2,
    L3,
    L4,
}

impl LevelId {
    pub const ALL: [LevelId; 4] = [LevelId::L1, LevelId::L2, LevelId::L3, LevelId::L4];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LevelId::L1 => "L1",
            LevelId::L2 => "L2",
            LevelId::L3 => "L3",
            LevelId::L4 => "L4",
        }
    }
}

impl fmt::Display for LevelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LevelId {
    type Err = SessionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "L1" | "l1" | "1" => Ok(LevelId::L1),
            "L2" | "l2" | "2" => Ok(LevelId::L2),
            "L3" | "l3" | "3" => Ok(LevelId::L3),
            "L4" | "l4" | "4" => Ok(LevelId::L4),
            other => Err(SessionError::UnknownLevel(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("no samples")]
    NoSamples,
    #[error("time regression at sample {index} (t = {t})")]
    TimeRegression { index: usize, t: f64 },
    #[error("invalid coordinate at sample {index}")]
    InvalidCoordinate { index: usize },
    #[error("window start {start} is not before end {end}")]
    DegenerateWindow { start: f64, end: f64 },
    #[error("joint not tracked: {0}")]
    JointNotTracked(JointId),
    #[error("empty trajectory: no {joint} samples in [{start}, {end})")]
    EmptyTrajectory { joint: JointId, start: f64, end: f64 },
    #[error("unknown level {0:?}")]
    UnknownLevel(String),
    #[error("invalid segmentation: {0}")]
    InvalidSegmentation(String),
}

/// One timestamped snapshot of tracked joint positions.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSample {
    pub t: f64,
    pub joints: BTreeMap<JointId, Vec3>,
}

impl PoseSample {
    pub fn new(t: f64) -> Self {
        PoseSample { t, joints: BTreeMap::new() }
    }

    pub fn with(mut self, joint: JointId, p: Vec3) -> Self {
        self.joints.insert(joint, p);
        self
    }

    pub fn get(&self, joint: &JointId) -> Option<Vec3> {
        self.joints.get(joint).copied()
    }
}

/// Checks stream invariants: non-empty, finite, strictly increasing time.
pub fn validate_stream(samples: &[PoseSample]) -> Result<(), SessionError> {
    if samples.is_empty() {
        return Err(SessionError::NoSamples);
    }
    let mut prev = None;
    for (index, s) in samples.iter().enumerate() {
        if !s.t.is_finite() || s.t < 0.0 || s.joints.values().any(|p| !p.is_finite()) {
            return Err(SessionError::InvalidCoordinate { index });
        }
        if let Some(p) = prev {
            if s.t <= p {
                return Err(SessionError::TimeRegression { index, t: s.t });
            }
        }
        prev = Some(s.t);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimedPoint {
    pub t: f64,
    pub p: Vec3,
}

/// Ordered positions of one joint.
///
/// `segment_starts` lists sample indices that begin a new contiguous run
/// (after a gap too long to interpolate). Index 0 is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTrajectory {
    pub joint: JointId,
    pub samples: Vec<TimedPoint>,
    pub nominal_rate: f64,
    pub segment_starts: Vec<usize>,
}

impl JointTrajectory {
    pub fn new(joint: JointId, samples: Vec<TimedPoint>) -> Result<Self, SessionError> {
        Self::with_rate(joint, samples, NOMINAL_RATE_HZ)
    }

    pub fn with_rate(
        joint: JointId,
        samples: Vec<TimedPoint>,
        nominal_rate: f64,
    ) -> Result<Self, SessionError> {
        if samples.is_empty() {
            return Err(SessionError::NoSamples);
        }
        for (index, w) in samples.windows(2).enumerate() {
            if w[1].t <= w[0].t {
                return Err(SessionError::TimeRegression { index: index + 1, t: w[1].t });
            }
        }
        if let Some(index) = samples.iter().position(|s| !s.p.is_finite() || !s.t.is_finite()) {
            return Err(SessionError::InvalidCoordinate { index });
        }
        Ok(JointTrajectory { joint, samples, nominal_rate, segment_starts: Vec::new() })
    }

    /// Builds a trajectory from raw positions on a uniform grid starting at t = 0.
    pub fn from_positions(joint: JointId, positions: &[Vec3], rate: f64) -> Result<Self, SessionError> {
        let samples = positions
            .iter()
            .enumerate()
            .map(|(i, &p)| TimedPoint { t: i as f64 / rate, p })
            .collect();
        Self::with_rate(joint, samples, rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.samples.iter().map(|s| s.p)
    }

    /// True when the interval ending at sample `i` crosses a segment split.
    pub fn starts_segment(&self, i: usize) -> bool {
        i == 0 || self.segment_starts.binary_search(&i).is_ok()
    }

    /// Index ranges of the contiguous runs.
    pub fn segments(&self) -> Vec<core::ops::Range<usize>> {
        let mut bounds = Vec::with_capacity(self.segment_starts.len() + 2);
        bounds.push(0);
        bounds.extend(self.segment_starts.iter().copied().filter(|&s| s > 0 && s < self.len()));
        bounds.push(self.len());
        bounds.windows(2).map(|w| w[0]..w[1]).collect()
    }
}

/// Half-open time window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
}

impl TimeWindow {
    pub fn new(start: f64, end: f64) -> Self {
        TimeWindow { start, end }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn everything() -> Self {
        TimeWindow { start: f64::NEG_INFINITY, end: f64::INFINITY }
    }
}

/// Pulls one joint out of a pose stream, restricted to `window`.
pub fn extract_trajectory(
    samples: &[PoseSample],
    joint: &JointId,
    window: TimeWindow,
) -> Result<JointTrajectory, SessionError> {
    if !(window.start < window.end) {
        return Err(SessionError::DegenerateWindow { start: window.start, end: window.end });
    }
    let mut seen = false;
    let mut points = Vec::new();
    for s in samples {
        if let Some(p) = s.get(joint) {
            seen = true;
            if window.contains(s.t) {
                points.push(TimedPoint { t: s.t, p });
            }
        }
    }
    if !seen {
        return Err(SessionError::JointNotTracked(joint.clone()));
    }
    if points.is_empty() {
        return Err(SessionError::EmptyTrajectory {
            joint: joint.clone(),
            start: window.start,
            end: window.end,
        });
    }
    JointTrajectory::new(joint.clone(), points)
}

/// A dropout longer than the nominal frame spacing.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Gap {
    pub joint: JointId,
    pub start_t: f64,
    pub end_t: f64,
}

impl Gap {
    pub fn duration(&self) -> f64 {
        self.end_t - self.start_t
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GapReport {
    /// Gaps longer than `max_gap`; each starts a new segment.
    pub split: Vec<Gap>,
    /// Gaps that were filled by interpolation.
    pub filled: Vec<Gap>,
    pub interpolated_samples: usize,
}

impl GapReport {
    pub fn is_empty(&self) -> bool {
        self.split.is_empty() && self.filled.is_empty()
    }
}

/// Linearly interpolates dropouts up to `max_gap` seconds at the nominal
/// rate and splits the trajectory at longer ones.
///
/// A dropout is any spacing above 1.5 nominal frames, so ordinary timestamp
/// jitter is left alone. Original samples are never moved or removed.
pub fn fill_gaps(traj: &JointTrajectory, max_gap: f64) -> (JointTrajectory, GapReport) {
    let dt = 1.0 / traj.nominal_rate;
    let mut report = GapReport::default();
    let mut samples = Vec::with_capacity(traj.samples.len());
    let mut starts = Vec::new();

    for (i, cur) in traj.samples.iter().enumerate() {
        if i > 0 {
            let prev = traj.samples[i - 1];
            let span = cur.t - prev.t;
            if traj.starts_segment(i) {
                starts.push(samples.len());
            } else if span > 1.5 * dt {
                let gap = Gap { joint: traj.joint.clone(), start_t: prev.t, end_t: cur.t };
                if span <= max_gap {
                    let steps = floor((span - 0.5 * dt) / dt) as usize;
                    for k in 1..=steps {
                        let t = prev.t + k as f64 * dt;
                        let s = (t - prev.t) / span;
                        samples.push(TimedPoint { t, p: prev.p.lerp(cur.p, s) });
                    }
                    report.interpolated_samples += steps;
                    report.filled.push(gap);
                } else {
                    starts.push(samples.len());
                    report.split.push(gap);
                }
            }
        }
        samples.push(*cur);
    }

    let out = JointTrajectory {
        joint: traj.joint.clone(),
        samples,
        nominal_rate: traj.nominal_rate,
        segment_starts: starts,
    };
    (out, report)
}

/// A level's time window inside a session.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelWindow {
    pub level: LevelId,
    pub start_t: f64,
    pub end_t: f64,
}

impl LevelWindow {
    pub fn window(&self) -> TimeWindow {
        TimeWindow::new(self.start_t, self.end_t)
    }
}

/// Ordered, non-overlapping level windows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelSegmentation {
    pub windows: Vec<LevelWindow>,
}

impl LevelSegmentation {
    /// Validates ordering, non-overlap, and that each window lasts at most
    /// `max_duration + 1` seconds.
    pub fn new(windows: Vec<LevelWindow>, max_duration: f64) -> Result<Self, SessionError> {
        let bad = |msg: alloc::string::String| Err(SessionError::InvalidSegmentation(msg));
        for (i, w) in windows.iter().enumerate() {
            if !(w.start_t.is_finite() && w.end_t.is_finite()) || w.start_t >= w.end_t {
                return bad(alloc::format!("window {i} ({}) is empty or not finite", w.level));
            }
            if w.end_t - w.start_t > max_duration + 1.0 {
                return bad(alloc::format!(
                    "window {i} ({}) lasts {:.3} s, longer than {:.3} s",
                    w.level,
                    w.end_t - w.start_t,
                    max_duration + 1.0
                ));
            }
            if i > 0 && w.start_t < windows[i - 1].end_t {
                return bad(alloc::format!("window {i} ({}) overlaps its predecessor", w.level));
            }
        }
        Ok(LevelSegmentation { windows })
    }

    /// Back-to-back windows of equal length after an initial offset.
    pub fn consecutive(levels: &[LevelId], offset: f64, duration: f64) -> Self {
        let windows = levels
            .iter()
            .enumerate()
            .map(|(i, &level)| LevelWindow {
                level,
                start_t: offset + i as f64 * duration,
                end_t: offset + (i + 1) as f64 * duration,
            })
            .collect();
        LevelSegmentation { windows }
    }
}

/// Nearly-equal comparison for timestamps.
#[cfg(test)]
pub(crate) fn close(a: f64, b: f64, tol: f64) -> bool {
    libm::fabs(a - b) <= tol
}
