//! Parametric synthetic patients.
//!
//! A patient plays a target script: each hand eases onto the moving target
//! with a minimum-jerk blend, then rides the path. The plan is shrunk toward
//! the boundary center by `amplitude_scale`, delayed by `reaction_delay`,
//! speed limited by `speed_scale` and perturbed by band-limited tremor.
//! Elbows come from a two-link arm anchored at fixed shoulders.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::game::{build_level_schedule, GameError, LevelSpec, MovementBoundary, SessionPlan, TargetKind, TargetScript};
use crate::kinematics::{level_metrics, MetricsConfig};
use crate::math::{exp, mix_seed, sin, sqrt, Vec3};
use crate::session::{JointId, LevelId, LevelSegmentation, PoseSample, NOMINAL_RATE_HZ};

pub const UPPER_ARM_M: f64 = 0.30;
pub const FOREARM_M: f64 = 0.28;
pub const SHOULDER_HALF_WIDTH_M: f64 = 0.17;
/// Shoulders sit this far behind the play plane (toward the body, +Z).
pub const SHOULDER_DEPTH_M: f64 = 0.25;
/// Hand speed limit at `speed_scale = 1`.
pub const MAX_HAND_SPEED_MPS: f64 = 1.5;
pub const TREMOR_CUTOFF_HZ: f64 = 4.0;
/// Forward bulge of a transition, as a fraction of its length.
pub const TRANSITION_BULGE: f64 = 0.15;
pub const LINE_BLEND_BEATS: f64 = 1.0;
pub const HOLD_BLEND_BEATS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatientProfile {
    /// 1 reaches the full boundary, 0 pins the hands at its center.
    pub amplitude_scale: f64,
    /// Fraction of [`MAX_HAND_SPEED_MPS`].
    pub speed_scale: f64,
    /// Stationary per-axis tremor sd, meters.
    pub tremor_sd: f64,
    /// Seconds.
    pub reaction_delay: f64,
    pub seed: u64,
}

impl Default for PatientProfile {
    fn default() -> Self {
        PatientProfile { amplitude_scale: 1.0, speed_scale: 1.0, tremor_sd: 1e-4, reaction_delay: 0.05, seed: 0 }
    }
}

impl PatientProfile {
    /// No tremor, no delay, full amplitude and speed.
    pub fn perfect(seed: u64) -> Self {
        PatientProfile { amplitude_scale: 1.0, speed_scale: 1.0, tremor_sd: 0.0, reaction_delay: 0.0, seed }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidProfile(m.into()));
        if !(0.0..=1.0).contains(&self.amplitude_scale) {
            return bad("amplitude_scale must be in [0, 1]");
        }
        if !(self.speed_scale > 0.0 && self.speed_scale <= 1.0) {
            return bad("speed_scale must be in (0, 1]");
        }
        if !(self.tremor_sd.is_finite() && self.tremor_sd >= 0.0) {
            return bad("tremor_sd must be finite and >= 0");
        }
        if !(self.reaction_delay.is_finite() && self.reaction_delay >= 0.0) {
            return bad("reaction_delay must be finite and >= 0");
        }
        Ok(())
    }
}

/// Generated samples plus what produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticStream {
    pub samples: Vec<PoseSample>,
    pub profile: PatientProfile,
    pub levels: Vec<LevelId>,
    pub script_hashes: Vec<u64>,
}

fn min_jerk(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

/// Fixed shoulder anchors (left, right) for a boundary.
pub fn shoulders(boundary: &MovementBoundary) -> [Vec3; 2] {
    let y = boundary.rest_y + 0.5 * boundary.height();
    let z = boundary.forward_z + SHOULDER_DEPTH_M;
    let cx = boundary.center_x();
    [Vec3::new(cx - SHOULDER_HALF_WIDTH_M, y, z), Vec3::new(cx + SHOULDER_HALF_WIDTH_M, y, z)]
}

fn rest_points(boundary: &MovementBoundary) -> [Vec3; 2] {
    [boundary.at(0.30, 0.10), boundary.at(0.70, 0.10)]
}

/// Two-link arm: returns the reachable hand and its elbow. `outward` is -1
/// for the left arm and +1 for the right.
pub fn arm_pose(shoulder: Vec3, hand: Vec3, outward: f64) -> (Vec3, Vec3) {
    let (a, b) = (UPPER_ARM_M, FOREARM_M);
    let (min_reach, max_reach) = (a - b, a + b);
    let offset = hand - shoulder;
    let dir = offset.normalized().unwrap_or(Vec3::new(0.0, -1.0, 0.0));
    let d = offset.norm().clamp(min_reach, max_reach);
    let hand = shoulder + dir * d;
    let along = (d * d + a * a - b * b) / (2.0 * d);
    let radius = sqrt((a * a - along * along).max(0.0));
    let pole = Vec3::new(outward, -1.0, 0.0);
    let perp = (pole - dir * pole.dot(dir))
        .normalized()
        .or_else(|| (Vec3::new(0.0, 0.0, 1.0) - dir * dir.z).normalized())
        .unwrap_or(Vec3::new(1.0, 0.0, 0.0));
    (hand, shoulder + dir * along + perp * radius)
}

/// Per-level hand plan, evaluated at non-decreasing level times.
#[derive(Debug)]
struct Planner<'s> {
    script: &'s TargetScript,
    event: Option<usize>,
    anchor: [Vec3; 2],
    pos: [Vec3; 2],
}

impl<'s> Planner<'s> {
    fn new(script: &'s TargetScript, start: [Vec3; 2]) -> Self {
        Planner { script, event: None, anchor: start, pos: start }
    }

    fn at(&mut self, t: f64) -> [Vec3; 2] {
        let events = &self.script.events;
        let next = self.event.map_or(0, |i| i + 1);
        let mut switched = false;
        let mut i = next;
        while i < events.len() && events[i].appear_t <= t {
            i += 1;
            switched = true;
        }
        if switched {
            self.event = Some(i - 1);
            self.anchor = self.pos;
        }
        let Some(idx) = self.event else { return self.pos };
        let e = &events[idx];
        let beat = self.script.beat();
        let tau = beat
            * match e.kind {
                TargetKind::Line => LINE_BLEND_BEATS,
                TargetKind::Hold => HOLD_BLEND_BEATS,
            };
        let u = (t - e.appear_t) / tau;
        for (joint, target) in e.targets_at(t, beat).into_iter().flatten() {
            let h = if joint == JointId::LeftHand { 0 } else { 1 };
            let p = if u < 1.0 {
                let a = self.anchor[h];
                let mut p = a.lerp(target, min_jerk(u));
                p.z -= TRANSITION_BULGE * a.distance(target) * sin(core::f64::consts::PI * u.clamp(0.0, 1.0));
                p
            } else {
                target
            };
            self.pos[h] = p;
        }
        self.pos
    }
}

/// Speed limit, tremor and arm model applied to a stream of planned hand
/// positions.
#[derive(Debug)]
struct Performer {
    profile: PatientProfile,
    center: Vec3,
    shoulders: [Vec3; 2],
    hands: Option<[Vec3; 2]>,
    tremor: [Vec3; 2],
    alpha: f64,
    rng: ChaCha8Rng,
}

impl Performer {
    fn new(profile: PatientProfile, boundary: &MovementBoundary, seed: u64) -> Self {
        let dt = 1.0 / NOMINAL_RATE_HZ;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sd = profile.tremor_sd;
        let mut tremor = [Vec3::ZERO; 2];
        if sd > 0.0 {
            for t in &mut tremor {
                *t = gaussian3(&mut rng) * sd;
            }
        }
        Performer {
            profile,
            center: boundary.center(),
            shoulders: shoulders(boundary),
            hands: None,
            tremor,
            alpha: exp(-2.0 * core::f64::consts::PI * TREMOR_CUTOFF_HZ * dt),
            rng,
        }
    }

    fn sample(&mut self, t: f64, plan: [Vec3; 2]) -> PoseSample {
        let dt = 1.0 / NOMINAL_RATE_HZ;
        let a = self.profile.amplitude_scale;
        let goal = plan.map(|p| self.center + (p - self.center) * a);
        let hands = match self.hands {
            None => goal,
            Some(prev) => {
                let step = MAX_HAND_SPEED_MPS * self.profile.speed_scale * dt;
                [0, 1].map(|h| {
                    let d = goal[h] - prev[h];
                    let n = d.norm();
                    if n > step { prev[h] + d * (step / n) } else { goal[h] }
                })
            }
        };
        self.hands = Some(hands);

        let sd = self.profile.tremor_sd;
        if sd > 0.0 {
            let innovation = sqrt(1.0 - self.alpha * self.alpha) * sd;
            for h in 0..2 {
                let e = gaussian3(&mut self.rng);
                self.tremor[h] = self.tremor[h] * self.alpha + e * innovation;
            }
        }

        let mut s = PoseSample::new(t);
        let joints = [
            (JointId::LeftHand, JointId::LeftElbow, JointId::LeftShoulder, -1.0),
            (JointId::RightHand, JointId::RightElbow, JointId::RightShoulder, 1.0),
        ];
        for (h, (hand_id, elbow_id, shoulder_id, outward)) in joints.into_iter().enumerate() {
            let wanted = if sd > 0.0 { hands[h] + self.tremor[h] } else { hands[h] };
            let (hand, elbow) = arm_pose(self.shoulders[h], wanted, outward);
            s.joints.insert(hand_id, hand);
            s.joints.insert(elbow_id, elbow);
            s.joints.insert(shoulder_id, self.shoulders[h]);
        }
        s
    }
}

fn gaussian3(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Plays one level with level time starting at 0.
pub fn generate(
    profile: &PatientProfile,
    script: &TargetScript,
    boundary: &MovementBoundary,
) -> Result<SyntheticStream, SynthError> {
    generate_at(profile, script, boundary, 0.0)
}

/// Plays one level starting at session time `start_t`.
pub fn generate_at(
    profile: &PatientProfile,
    script: &TargetScript,
    boundary: &MovementBoundary,
    start_t: f64,
) -> Result<SyntheticStream, SynthError> {
    profile.validate()?;
    boundary.validate()?;
    let dt = 1.0 / NOMINAL_RATE_HZ;
    let n = crate::math::floor(script.level.duration * NOMINAL_RATE_HZ + 1e-9) as usize;
    let hash = script.content_hash();
    let mut performer = Performer::new(*profile, boundary, mix_seed(profile.seed, hash));
    let mut planner = Planner::new(script, rest_points(boundary));
    let samples = (0..n)
        .map(|i| {
            let local = i as f64 * dt;
            let plan = planner.at(local - profile.reaction_delay);
            performer.sample(start_t + local, plan)
        })
        .collect();
    Ok(SyntheticStream { samples, profile: *profile, levels: alloc::vec![script.level.id], script_hashes: alloc::vec![hash] })
}

/// A whole session: hands rest during the tutorial, then every level of
/// `plan` is played back to back on one 50 Hz clock.
pub fn generate_session(
    profile: &PatientProfile,
    plan: &SessionPlan,
    boundary: &MovementBoundary,
    seed: u64,
) -> Result<(SyntheticStream, Vec<TargetScript>), SynthError> {
    profile.validate()?;
    let scripts = plan
        .levels
        .iter()
        .map(|spec| build_level_schedule(spec, boundary, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let hashes: Vec<u64> = scripts.iter().map(TargetScript::content_hash).collect();
    let stream_seed = hashes.iter().fold(mix_seed(profile.seed, seed), |acc, &h| mix_seed(acc, h));
    let mut performer = Performer::new(*profile, boundary, stream_seed);
    let starts = plan.level_starts();
    let dt = 1.0 / NOMINAL_RATE_HZ;
    let n = crate::math::floor(plan.total_duration() * NOMINAL_RATE_HZ + 1e-9) as usize;

    let mut pos = rest_points(boundary);
    let mut current: Option<(usize, Planner<'_>)> = None;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * dt;
        let tp = t - profile.reaction_delay;
        let level = starts.iter().rposition(|&s| s <= tp + 1e-9);
        if let Some(k) = level {
            if current.as_ref().is_none_or(|(c, _)| *c != k) {
                current = Some((k, Planner::new(&scripts[k], pos)));
            }
        }
        if let Some((k, planner)) = current.as_mut() {
            pos = planner.at(tp - starts[*k]);
        }
        samples.push(performer.sample(t, pos));
    }
    let stream = SyntheticStream {
        samples,
        profile: *profile,
        levels: plan.levels.iter().map(|l| l.id).collect(),
        script_hashes: hashes,
    };
    Ok((stream, scripts))
}

/// Hands circle in the play plane, mirrored, for tracking tasks. One lap
/// takes `period_s`.
pub fn circle_task(
    profile: &PatientProfile,
    boundary: &MovementBoundary,
    period_s: f64,
    duration_s: f64,
    start_t: f64,
) -> Result<Vec<PoseSample>, SynthError> {
    profile.validate()?;
    boundary.validate()?;
    if !(period_s > 0.0 && duration_s >= 0.0) {
        return Err(SynthError::InvalidProfile("circle period must be positive".into()));
    }
    let dt = 1.0 / NOMINAL_RATE_HZ;
    let n = crate::math::floor(duration_s * NOMINAL_RATE_HZ + 1e-9) as usize;
    let mut performer = Performer::new(*profile, boundary, mix_seed(profile.seed, period_s.to_bits()));
    let radius = 0.2 * boundary.width().min(boundary.height());
    let centers = [boundary.at(0.25, 0.5), boundary.at(0.75, 0.5)];
    Ok((0..n)
        .map(|i| {
            let t = i as f64 * dt;
            let ph = 2.0 * core::f64::consts::PI * (t - profile.reaction_delay).max(0.0) / period_s;
            let (s, c) = (sin(ph), crate::math::cos(ph));
            let plan = [
                centers[0] + Vec3::new(-c * radius, s * radius, 0.0),
                centers[1] + Vec3::new(c * radius, s * radius, 0.0),
            ];
            performer.sample(start_t + t, plan)
        })
        .collect())
}

/// Default healthy cohort: amplitude and speed in [0.85, 1], tremor
/// 0.5 to 1.5e-4 m, reaction delay up to 0.1 s.
pub fn healthy_population(n: usize, seed: u64) -> Vec<PatientProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| PatientProfile {
            amplitude_scale: rng.random_range(0.85..=1.0),
            speed_scale: rng.random_range(0.85..=1.0),
            tremor_sd: rng.random_range(0.5e-4..=1.5e-4),
            reaction_delay: rng.random_range(0.0..=0.1),
            seed: mix_seed(seed, i as u64),
        })
        .collect()
}

/// One long-format metric row. `None` marks a metric that could not be computed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PopulationRow {
    pub subject: usize,
    pub level: LevelId,
    pub joint: JointId,
    pub mean_speed: Option<f64>,
    pub rom: Option<f64>,
    pub volume: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationCell {
    pub subject: usize,
    pub stream: SyntheticStream,
    pub rows: Vec<PopulationRow>,
}

/// Script seed of one (subject, level) cell.
pub fn cell_seed(seed: u64, subject: usize, level: LevelId) -> u64 {
    mix_seed(mix_seed(seed, subject as u64), level.index() as u64)
}

/// Generates and measures one subject on one level.
pub fn population_cell(
    subject: usize,
    profile: &PatientProfile,
    spec: &LevelSpec,
    boundary: &MovementBoundary,
    seed: u64,
) -> Result<PopulationCell, SynthError> {
    let script = build_level_schedule(spec, boundary, cell_seed(seed, subject, spec.id))?;
    let stream = generate(profile, &script, boundary)?;
    let seg = LevelSegmentation::consecutive(&[spec.id], 0.0, spec.duration);
    let table = level_metrics(&stream.samples, &seg, &JointId::CORE, MetricsConfig::default());
    let rows = table
        .rows
        .into_iter()
        .map(|r| PopulationRow {
            subject,
            level: r.level,
            joint: r.joint,
            mean_speed: r.speed.ok().map(|s| s.mean_speed),
            rom: r.rom.ok().map(|s| s.rom),
            volume: r.workspace.ok().map(|w| w.volume),
        })
        .collect();
    Ok(PopulationCell { subject, stream, rows })
}

/// Every profile through every level, profile-major.
pub fn generate_population(
    profiles: &[PatientProfile],
    specs: &[LevelSpec],
    boundary: &MovementBoundary,
    seed: u64,
) -> Result<Vec<PopulationCell>, SynthError> {
    let mut out = Vec::with_capacity(profiles.len() * specs.len());
    for (subject, p) in profiles.iter().enumerate() {
        for spec in specs {
            out.push(population_cell(subject, p, spec, boundary, seed)?);
        }
    }
    Ok(out)
}
