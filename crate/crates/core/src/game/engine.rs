//! Replay of a pose stream against a target script.

use alloc::vec::Vec;

use super::{GameError, TargetKind, TargetScript};
use crate::session::{LevelId, PoseSample};

/// Radius of the contact sphere around each hand joint.
pub const DEFAULT_CAPTURE_RADIUS_M: f64 = 0.10;

const MILESTONES: [(f64, EventKind); 3] = [
    (0.25, EventKind::Milestone25),
    (0.50, EventKind::Milestone50),
    (0.75, EventKind::Milestone75),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub capture_radius: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { capture_radius: DEFAULT_CAPTURE_RADIUS_M }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EventKind {
    Hit,
    Miss,
    HoldComplete,
    HoldBroken,
    Milestone25,
    Milestone50,
    Milestone75,
    LevelComplete,
}

impl EventKind {
    pub fn is_success(self) -> bool {
        matches!(self, EventKind::Hit | EventKind::HoldComplete)
    }

    pub fn resolves_target(self) -> bool {
        matches!(
            self,
            EventKind::Hit | EventKind::Miss | EventKind::HoldComplete | EventKind::HoldBroken
        )
    }
}

/// One emitted game event. `t` is session time.
///
/// `detail` carries the hand-to-target distance for hits, the held time for
/// completed holds and the elapsed fraction for milestones.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SessionEvent {
    pub t: f64,
    pub kind: EventKind,
    pub target_index: Option<usize>,
    pub detail: Option<f64>,
}

/// Per-level state machine. Feed samples in time order with [`step`](Self::step),
/// then call [`finish`](Self::finish).
#[derive(Debug, Clone)]
pub struct LevelSession<'s> {
    script: &'s TargetScript,
    config: EngineConfig,
    start_t: f64,
    next: usize,
    hold_since: Option<f64>,
    milestones_fired: usize,
    last_t: Option<f64>,
    complete: bool,
}

impl<'s> LevelSession<'s> {
    /// `start_t` is the session time at which the level begins.
    pub fn new(script: &'s TargetScript, config: EngineConfig, start_t: f64) -> Self {
        LevelSession {
            script,
            config,
            start_t,
            next: 0,
            hold_since: None,
            milestones_fired: 0,
            last_t: None,
            complete: false,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    fn total(&self) -> usize {
        self.script.events.len()
    }

    fn resolve(&mut self, t: f64, kind: EventKind, detail: Option<f64>, out: &mut Vec<SessionEvent>) {
        let index = self.next;
        out.push(SessionEvent { t, kind, target_index: Some(index), detail });
        self.next += 1;
        self.hold_since = None;
        let fraction = self.next as f64 / self.total() as f64;
        while let Some(&(threshold, kind)) = MILESTONES.get(self.milestones_fired) {
            if fraction + 1e-12 < threshold {
                break;
            }
            out.push(SessionEvent { t, kind, target_index: Some(index), detail: Some(fraction) });
            self.milestones_fired += 1;
        }
    }

    /// Resolves every target whose deadline is at or before level time `local`.
    fn expire(&mut self, local: f64, out: &mut Vec<SessionEvent>) {
        while let Some(e) = self.script.events.get(self.next) {
            if e.deadline_t > local {
                break;
            }
            let kind = match e.kind {
                TargetKind::Line => EventKind::Miss,
                TargetKind::Hold => EventKind::HoldBroken,
            };
            self.resolve(self.start_t + e.deadline_t, kind, None, out);
        }
    }

    fn complete_level(&mut self, out: &mut Vec<SessionEvent>) {
        if self.complete {
            return;
        }
        self.expire(f64::INFINITY, out);
        out.push(SessionEvent {
            t: self.start_t + self.script.level.duration,
            kind: EventKind::LevelComplete,
            target_index: None,
            detail: None,
        });
        self.complete = true;
    }

    /// Advances the level with one sample and returns the events it triggers.
    pub fn step(&mut self, sample: &PoseSample) -> Result<Vec<SessionEvent>, GameError> {
        if let Some(previous) = self.last_t {
            if sample.t <= previous {
                return Err(GameError::TimeRegression { t: sample.t, previous });
            }
        }
        self.last_t = Some(sample.t);
        let mut out = Vec::new();
        if self.complete {
            return Ok(out);
        }
        let local = sample.t - self.start_t;
        if local < 0.0 {
            return Ok(out);
        }
        self.expire(local, &mut out);
        if local >= self.script.level.duration {
            self.complete_level(&mut out);
            return Ok(out);
        }

        let Some(target) = self.script.events.get(self.next) else {
            return Ok(out);
        };
        if local < target.appear_t {
            return Ok(out);
        }

        let r = self.config.capture_radius;
        let mut worst: f64 = 0.0;
        let mut inside = true;
        for (joint, point) in target.targets_at(local, self.script.beat()).into_iter().flatten() {
            match sample.get(&joint) {
                Some(p) => {
                    let d = p.distance(point);
                    worst = worst.max(d);
                    inside &= d <= r;
                }
                None => inside = false,
            }
        }

        match target.kind {
            TargetKind::Line => {
                if inside {
                    self.resolve(sample.t, EventKind::Hit, Some(worst), &mut out);
                }
            }
            TargetKind::Hold => {
                if inside {
                    let since = *self.hold_since.get_or_insert(local);
                    let held = local - since;
                    if held + 1e-9 >= target.hold_duration.unwrap_or(0.0) {
                        self.resolve(sample.t, EventKind::HoldComplete, Some(held), &mut out);
                    }
                } else {
                    self.hold_since = None;
                }
            }
        }
        Ok(out)
    }

    /// Closes the level: remaining targets are missed at their deadlines and
    /// `LevelComplete` is emitted last.
    pub fn finish(&mut self) -> Vec<SessionEvent> {
        let mut out = Vec::new();
        self.complete_level(&mut out);
        out
    }
}

/// Replays `samples` (session time) through a level starting at `start_t`.
pub fn replay(
    script: &TargetScript,
    samples: &[PoseSample],
    config: EngineConfig,
    start_t: f64,
) -> Result<Vec<SessionEvent>, GameError> {
    let mut session = LevelSession::new(script, config, start_t);
    let mut events = Vec::new();
    for s in samples {
        events.extend(session.step(s)?);
    }
    events.extend(session.finish());
    Ok(events)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelCompletion {
    pub level: LevelId,
    pub targets_total: usize,
    pub targets_hit: usize,
    pub completion_fraction: f64,
}

impl LevelCompletion {
    pub fn new(level: LevelId, targets_total: usize, targets_hit: usize) -> Self {
        let completion_fraction =
            if targets_total == 0 { 0.0 } else { targets_hit as f64 / targets_total as f64 };
        LevelCompletion { level, targets_total, targets_hit, completion_fraction }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompletionSummary {
    pub levels: Vec<LevelCompletion>,
}

impl CompletionSummary {
    pub fn targets_total(&self) -> usize {
        self.levels.iter().map(|l| l.targets_total).sum()
    }

    pub fn targets_hit(&self) -> usize {
        self.levels.iter().map(|l| l.targets_hit).sum()
    }
}

/// Counts successes (hits and completed holds) of one level.
pub fn summarize(events: &[SessionEvent], script: &TargetScript) -> LevelCompletion {
    let hit = events.iter().filter(|e| e.kind.is_success()).count();
    LevelCompletion::new(script.level.id, script.events.len(), hit.min(script.events.len()))
}
