//! Beat-grid target scripts.
//!
//! A level is a sequence of phrases: four travel lines followed by one hold.
//! Every event starts on a beat. Lines stay active for two beats; a hold stays
//! active for the two-beat approach, its hold duration and one second of grace,
//! rounded up to whole beats. Events tile the timeline back to back, so the
//! scripted time ends within one beat of the level duration.

use alloc::vec::Vec;

use super::{GameError, LevelSpec, MovementBoundary, MovementType};
use crate::math::Vec3;
use crate::session::JointId;

pub const LINES_PER_PHRASE: usize = 4;
pub const LINE_BEATS: u64 = 2;
pub const HOLD_GRACE_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TargetKind {
    Line,
    Hold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Hand {
    Left,
    Right,
    Both,
}

impl Hand {
    pub fn joint(self) -> Option<JointId> {
        match self {
            Hand::Left => Some(JointId::LeftHand),
            Hand::Right => Some(JointId::RightHand),
            Hand::Both => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment3 {
    pub start: Vec3,
    pub end: Vec3,
}

impl Segment3 {
    pub fn new(start: Vec3, end: Vec3) -> Self {
        Segment3 { start, end }
    }

    pub fn point(p: Vec3) -> Self {
        Segment3 { start: p, end: p }
    }

    pub fn at(&self, s: f64) -> Vec3 {
        self.start.lerp(self.end, s.clamp(0.0, 1.0))
    }

    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }
}

/// One scripted target.
///
/// For [`Hand::Both`] `path` belongs to the left hand and `partner` to the right.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TargetEvent {
    pub kind: TargetKind,
    pub hand: Hand,
    pub path: Segment3,
    pub partner: Option<Segment3>,
    pub appear_t: f64,
    pub deadline_t: f64,
    pub hold_duration: Option<f64>,
}

impl TargetEvent {
    /// Fraction of the window elapsed at level time `t`.
    pub fn progress(&self, t: f64) -> f64 {
        ((t - self.appear_t) / (self.deadline_t - self.appear_t)).clamp(0.0, 1.0)
    }

    /// Target point of each required hand at level time `t`.
    ///
    /// Lines move at constant speed over the whole window; holds reach their
    /// point after the two-beat approach and stay there.
    pub fn targets_at(&self, t: f64, beat: f64) -> [Option<(JointId, Vec3)>; 2] {
        let s = match self.kind {
            TargetKind::Line => self.progress(t),
            TargetKind::Hold => ((t - self.appear_t) / (LINE_BEATS as f64 * beat)).clamp(0.0, 1.0),
        };
        match self.hand {
            Hand::Left => [Some((JointId::LeftHand, self.path.at(s))), None],
            Hand::Right => [Some((JointId::RightHand, self.path.at(s))), None],
            Hand::Both => [
                Some((JointId::LeftHand, self.path.at(s))),
                self.partner.map(|p| (JointId::RightHand, p.at(s))),
            ],
        }
    }

    pub fn span(&self) -> f64 {
        self.deadline_t - self.appear_t
    }

    /// Every path endpoint of this event.
    pub fn path_points(&self) -> impl Iterator<Item = Vec3> + '_ {
        [Some(self.path), self.partner]
            .into_iter()
            .flatten()
            .flat_map(|s| [s.start, s.end])
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TargetScript {
    pub level: LevelSpec,
    pub boundary: MovementBoundary,
    pub seed: u64,
    pub events: Vec<TargetEvent>,
}

impl TargetScript {
    pub fn beat(&self) -> f64 {
        self.level.beat()
    }

    /// Sum of event windows; the events tile the level without overlap.
    pub fn scripted_time(&self) -> f64 {
        self.events.iter().map(TargetEvent::span).sum()
    }

    /// FNV-1a over the script contents, used to tag generated streams.
    pub fn content_hash(&self) -> u64 {
        let mut h = Fnv::new();
        h.f(self.level.bpm);
        h.f(self.level.duration);
        h.f(self.level.hold_range.0);
        h.f(self.level.hold_range.1);
        h.u(self.level.id as u64);
        h.u(self.level.movement_type as u64);
        h.u(self.seed);
        for e in &self.events {
            h.u(e.kind as u64);
            h.u(e.hand as u64);
            for p in e.path_points() {
                h.f(p.x);
                h.f(p.y);
                h.f(p.z);
            }
            h.f(e.appear_t);
            h.f(e.deadline_t);
            h.f(e.hold_duration.unwrap_or(-1.0));
        }
        h.0
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn u(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn f(&mut self, v: f64) {
        self.u(v.to_bits());
    }
}

/// Box fractions (x, y) of a line's endpoints, for the left-hand variant.
/// Right-hand variants mirror x.
type Stroke = ((f64, f64), (f64, f64));

const LATERAL: [Stroke; 4] = [
    ((0.50, 0.30), (0.00, 0.60)),
    ((0.00, 0.80), (0.50, 0.50)),
    ((0.50, 0.40), (0.00, 0.90)),
    ((0.00, 0.70), (0.50, 0.20)),
];

const BILATERAL: [Stroke; 4] = [
    ((0.45, 0.40), (0.00, 0.50)),
    ((0.05, 0.55), (0.30, 1.00)),
    ((0.25, 0.95), (0.00, 0.45)),
    ((0.05, 0.40), (0.40, 0.10)),
];

/// Wrist strokes span 24% of each extent around a low anchor.
const WRIST: Stroke = ((0.13, 0.04), (0.37, 0.28));
const WRIST_HOLD: (f64, f64) = (0.25, 0.16);

/// Midline-crossing diagonal covering 90% of both extents.
const DIAGONAL: Stroke = ((0.05, 0.05), (0.95, 0.95));

const OVERHEAD_HOLD: (f64, f64) = (0.30, 1.00);

struct Geometry<'a> {
    b: &'a MovementBoundary,
}

impl Geometry<'_> {
    fn pt(&self, (fx, fy): (f64, f64), mirror: bool) -> Vec3 {
        let fx = if mirror { 1.0 - fx } else { fx };
        self.b.at(fx, fy)
    }

    fn seg(&self, (a, b): Stroke, mirror: bool, reverse: bool) -> Segment3 {
        let (s, e) = if reverse { (b, a) } else { (a, b) };
        Segment3::new(self.pt(s, mirror), self.pt(e, mirror))
    }

    fn single(&self, hand: Hand, stroke: Stroke, reverse: bool) -> (Hand, Segment3, Option<Segment3>) {
        (hand, self.seg(stroke, hand == Hand::Right, reverse), None)
    }

    fn both(&self, stroke: Stroke, reverse: bool) -> (Hand, Segment3, Option<Segment3>) {
        (Hand::Both, self.seg(stroke, false, reverse), Some(self.seg(stroke, true, reverse)))
    }

    /// Line `line` (global index) in phrase `phrase`.
    fn line(&self, mt: MovementType, line: usize, phrase: usize) -> (Hand, Segment3, Option<Segment3>) {
        let alternating = if line.is_multiple_of(2) { Hand::Left } else { Hand::Right };
        let per_hand_stroke = line / 2;
        match mt {
            MovementType::Wrist => self.single(alternating, WRIST, per_hand_stroke % 2 == 1),
            MovementType::Lateral => {
                let hand = if phrase.is_multiple_of(2) { Hand::Left } else { Hand::Right };
                self.single(hand, LATERAL[line % LINES_PER_PHRASE], false)
            }
            // bilateral lines alternate with one-arm lateral sweeps
            MovementType::Bilateral if line.is_multiple_of(2) => self.both(BILATERAL[line % LINES_PER_PHRASE], false),
            MovementType::Bilateral => {
                let hand = if (line / 2).is_multiple_of(2) { Hand::Left } else { Hand::Right };
                self.single(hand, LATERAL[line % LINES_PER_PHRASE], false)
            }
            MovementType::Overhead => {
                // the leading arm swaps every phrase
                let lead_left = phrase.is_multiple_of(2);
                let hand = if line.is_multiple_of(2) == lead_left { Hand::Left } else { Hand::Right };
                self.single(hand, DIAGONAL, line % LINES_PER_PHRASE >= 2)
            }
        }
    }

    fn hold(&self, mt: MovementType, phrase: usize) -> (Hand, Segment3, Option<Segment3>) {
        let side = if phrase.is_multiple_of(2) { Hand::Left } else { Hand::Right };
        let fixed = |hand: Hand, f| {
            let p = self.pt(f, hand == Hand::Right);
            (hand, Segment3::point(p), None)
        };
        match mt {
            MovementType::Wrist => fixed(side, WRIST_HOLD),
            MovementType::Lateral => fixed(side, (0.0, 0.5)),
            MovementType::Bilateral | MovementType::Overhead => (
                Hand::Both,
                Segment3::point(self.pt(OVERHEAD_HOLD, false)),
                Some(Segment3::point(self.pt(OVERHEAD_HOLD, true))),
            ),
        }
    }
}

fn hold_beats(hold: f64, beat: f64) -> u64 {
    let raw = (LINE_BEATS as f64 * beat + hold + HOLD_GRACE_S) / beat;
    libm::ceil(raw - 1e-9) as u64
}

/// Builds the target script of one level.
///
/// Hold durations cycle through `min, min + 1, ..., max` starting at an
/// offset chosen by `seed`, so a given seed always yields the same script.
pub fn build_level_schedule(
    spec: &LevelSpec,
    boundary: &MovementBoundary,
    seed: u64,
) -> Result<TargetScript, GameError> {
    spec.validate()?;
    boundary.validate()?;

    let beat = spec.beat();
    let total_beats = crate::math::floor(spec.duration / beat + 1e-9) as u64;
    let steps = spec.hold_steps();
    let geo = Geometry { b: boundary };

    // (kind, span in beats, hold duration, geometry)
    let mut plan: Vec<(TargetKind, u64, Option<f64>, (Hand, Segment3, Option<Segment3>))> = Vec::new();
    let mut used = 0u64;
    let mut line = 0usize;
    let mut holds = 0usize;
    let mut phrase = 0usize;
    let mut in_phrase = 0usize;
    let mut holds_fit = true;

    loop {
        let want_hold = in_phrase == LINES_PER_PHRASE && holds_fit;
        if want_hold {
            let h = steps[(seed as usize % steps.len() + holds) % steps.len()];
            let span = hold_beats(h, beat);
            if used + span <= total_beats {
                plan.push((TargetKind::Hold, span, Some(h), geo.hold(spec.movement_type, phrase)));
                used += span;
                holds += 1;
                phrase += 1;
                in_phrase = 0;
                continue;
            }
            // no room for another hold: finish with lines
            holds_fit = false;
        }
        if used + LINE_BEATS > total_beats {
            break;
        }
        plan.push((TargetKind::Line, LINE_BEATS, None, geo.line(spec.movement_type, line, phrase)));
        used += LINE_BEATS;
        line += 1;
        in_phrase += 1;
        if !holds_fit && in_phrase > LINES_PER_PHRASE {
            in_phrase = LINES_PER_PHRASE;
        }
    }

    // Absorb a single leftover beat into the last hold (or the last line).
    if used < total_beats {
        let slot = plan
            .iter()
            .rposition(|p| p.0 == TargetKind::Hold)
            .or_else(|| plan.len().checked_sub(1));
        match slot {
            Some(i) => plan[i].1 += total_beats - used,
            None => plan.push((
                TargetKind::Line,
                total_beats - used,
                None,
                geo.line(spec.movement_type, 0, 0),
            )),
        }
    }

    let mut cursor = 0u64;
    let events = plan
        .into_iter()
        .map(|(kind, span, hold_duration, (hand, path, partner))| {
            let appear_t = cursor as f64 * beat;
            cursor += span;
            TargetEvent {
                kind,
                hand,
                path,
                partner,
                appear_t,
                deadline_t: cursor as f64 * beat,
                hold_duration,
            }
        })
        .collect();

    Ok(TargetScript { level: *spec, boundary: *boundary, seed, events })
}
