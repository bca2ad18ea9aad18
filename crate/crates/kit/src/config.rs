//! TOML configuration files.
//!
//! Levels override the default table per level id:
//!
//! ```toml
//! tutorial_s = 30
//! [levels.L2]
//! bpm = 100
//! movement_type = "lateral"
//! hold_min_s = 6
//! hold_max_s = 8
//! duration_s = 120
//! ```
//!
//! Profiles list synthetic patients; omitted keys take the defaults:
//!
//! ```toml
//! [[profile]]
//! name = "P01"
//! amplitude_scale = 0.6
//! speed_scale = 0.5
//! tremor_sd = 0.002   # m
//! reaction_delay = 0.2 # s
//! seed = 11
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use mobility_core::game::{LevelSpec, MovementBoundary, SessionPlan};
use mobility_core::synth::PatientProfile;
use mobility_core::LevelId;
use serde::Deserialize;

use crate::error::{KitError, Result};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| KitError::io(path, e))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    toml::from_str(&read(path)?).map_err(|e| KitError::file(path, e.message()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelOverride {
    bpm: Option<f64>,
    movement_type: Option<String>,
    hold_min_s: Option<f64>,
    hold_max_s: Option<f64>,
    duration_s: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelsFile {
    tutorial_s: Option<f64>,
    #[serde(default)]
    levels: BTreeMap<String, LevelOverride>,
}

/// Default levels with the overrides of `text` applied.
pub fn parse_levels(text: &str) -> std::result::Result<SessionPlan, String> {
    let file: LevelsFile = toml::from_str(text).map_err(|e| e.message().to_string())?;
    let mut specs = LevelSpec::defaults();
    for (key, o) in file.levels {
        let id: LevelId = key.parse().map_err(|e| format!("{e}"))?;
        let s = &mut specs[id.index()];
        if let Some(v) = o.bpm {
            s.bpm = v;
        }
        if let Some(v) = o.movement_type {
            s.movement_type = v.parse().map_err(|e| format!("{key}: {e}"))?;
        }
        if let Some(v) = o.hold_min_s {
            s.hold_range.0 = v;
        }
        if let Some(v) = o.hold_max_s {
            s.hold_range.1 = v;
        }
        if let Some(v) = o.duration_s {
            s.duration = v;
        }
        s.validate().map_err(|e| format!("{key}: {e}"))?;
    }
    let tutorial_s = file.tutorial_s.unwrap_or(0.0);
    if !(tutorial_s.is_finite() && tutorial_s >= 0.0) {
        return Err("tutorial_s must be >= 0".into());
    }
    Ok(SessionPlan { tutorial_s, levels: specs.to_vec() })
}

pub fn read_levels(path: Option<&Path>) -> Result<SessionPlan> {
    match path {
        None => Ok(SessionPlan::default()),
        Some(p) => parse_levels(&read(p)?).map_err(|e| KitError::file(p, e)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileEntry {
    name: Option<String>,
    amplitude_scale: Option<f64>,
    speed_scale: Option<f64>,
    tremor_sd: Option<f64>,
    reaction_delay: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfilesFile {
    #[serde(default)]
    profile: Vec<ProfileEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedProfile {
    pub name: String,
    pub profile: PatientProfile,
}

pub fn parse_profiles(text: &str) -> std::result::Result<Vec<NamedProfile>, String> {
    let file: ProfilesFile = toml::from_str(text).map_err(|e| e.message().to_string())?;
    if file.profile.is_empty() {
        return Err("no [[profile]] entries".into());
    }
    file.profile
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            let d = PatientProfile::default();
            let profile = PatientProfile {
                amplitude_scale: e.amplitude_scale.unwrap_or(d.amplitude_scale),
                speed_scale: e.speed_scale.unwrap_or(d.speed_scale),
                tremor_sd: e.tremor_sd.unwrap_or(d.tremor_sd),
                reaction_delay: e.reaction_delay.unwrap_or(d.reaction_delay),
                seed: e.seed.unwrap_or(i as u64),
            };
            let name = e.name.unwrap_or_else(|| format!("S{:02}", i + 1));
            profile.validate().map_err(|err| format!("{name}: {err}"))?;
            Ok(NamedProfile { name, profile })
        })
        .collect()
}

pub fn read_profiles(path: &Path) -> Result<Vec<NamedProfile>> {
    parse_profiles(&read(path)?).map_err(|e| KitError::file(path, e))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryFile {
    rest_y: f64,
    overhead_y: f64,
    lateral_left_x: f64,
    lateral_right_x: f64,
    forward_z: f64,
}

/// Boundary in meters; `None` gives the synthetic default.
pub fn read_boundary(path: Option<&Path>) -> Result<MovementBoundary> {
    let Some(p) = path else { return Ok(MovementBoundary::synthetic_default()) };
    let f: BoundaryFile = parse(p)?;
    let b = MovementBoundary {
        rest_y: f.rest_y,
        overhead_y: f.overhead_y,
        lateral_left_x: f.lateral_left_x,
        lateral_right_x: f.lateral_right_x,
        forward_z: f.forward_z,
    };
    b.validate().map_err(|e| KitError::file(p, e))?;
    Ok(b)
}

pub fn boundary_toml(b: &MovementBoundary) -> String {
    format!(
        "rest_y = {}\noverhead_y = {}\nlateral_left_x = {}\nlateral_right_x = {}\nforward_z = {}\n",
        b.rest_y, b.overhead_y, b.lateral_left_x, b.lateral_right_x, b.forward_z
    )
}
