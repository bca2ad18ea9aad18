//! Consolidated session report and plot series.

use std::fmt::Write as _;
use std::path::Path;

use mobility_core::game::{build_level_schedule, replay, summarize, CompletionSummary, EngineConfig, MovementBoundary, SessionPlan};
use mobility_core::kinematics::{level_metrics, MetricsConfig};
use mobility_core::session::{extract_trajectory, LevelSegmentation};
use mobility_core::tracking::{ape_report, ApeOptions, ApeRow, TrackingCell};
use mobility_core::{JointId, PoseSample};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::csvio::{self, MetricsRecord, PhysioRow};
use crate::error::{KitError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Accumulates everything that identifies a report's inputs.
#[derive(Debug, Default, Clone)]
pub struct ConfigHasher(Sha256);

impl ConfigHasher {
    pub fn new() -> Self {
        let mut h = ConfigHasher(Sha256::new());
        h.field("tool", TOOL_VERSION.as_bytes());
        h
    }

    /// Length-prefixed so adjacent fields cannot alias.
    pub fn field(&mut self, name: &str, bytes: &[u8]) {
        for part in [name.as_bytes(), bytes] {
            self.0.update((part.len() as u64).to_le_bytes());
            self.0.update(part);
        }
    }

    pub fn file(&mut self, name: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| KitError::io(path, e))?;
        self.field(name, &bytes);
        Ok(())
    }

    pub fn finish(self) -> String {
        self.0.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysioChange {
    pub measure: String,
    pub baseline: f64,
    /// Percent change at L1..L4.
    pub percent: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApeRecord {
    pub task: String,
    pub joint: String,
    pub mean_m: Option<f64>,
    pub sd_m: Option<f64>,
    pub rmse_m: Option<f64>,
    pub max_m: Option<f64>,
    pub n: usize,
    pub flags: String,
}

impl From<&ApeRow> for ApeRecord {
    fn from(r: &ApeRow) -> Self {
        match &r.stats {
            Ok(s) => ApeRecord {
                task: r.task.clone(),
                joint: r.joint.code().into(),
                mean_m: Some(s.mean),
                sd_m: Some(s.sd),
                rmse_m: Some(s.rmse),
                max_m: Some(s.max),
                n: s.n,
                flags: String::new(),
            },
            Err(e) => ApeRecord {
                task: r.task.clone(),
                joint: r.joint.code().into(),
                mean_m: None,
                sd_m: None,
                rmse_m: None,
                max_m: None,
                n: 0,
                flags: format!("empty: {e}"),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionReport {
    pub session_id: String,
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub completion: CompletionSummary,
    pub metrics: Vec<MetricsRecord>,
    pub ape: Option<Vec<ApeRecord>>,
    pub physio: Option<Vec<PhysioChange>>,
}

pub struct ReportInputs<'a> {
    pub samples: &'a [PoseSample],
    pub segmentation: &'a LevelSegmentation,
    pub plan: &'a SessionPlan,
    pub boundary: &'a MovementBoundary,
    pub seed: u64,
    pub engine: EngineConfig,
    pub metrics: MetricsConfig,
    pub reference: Option<&'a [PoseSample]>,
    pub ape: ApeOptions,
    pub physio: Option<&'a [PhysioRow]>,
    pub config_hash: String,
    pub session_id: Option<String>,
}

/// Replays each segmented level against its rebuilt script.
pub fn completion(
    samples: &[PoseSample],
    segmentation: &LevelSegmentation,
    plan: &SessionPlan,
    boundary: &MovementBoundary,
    seed: u64,
    engine: EngineConfig,
) -> Result<CompletionSummary> {
    let mut levels = Vec::new();
    for w in &segmentation.windows {
        let spec = plan
            .levels
            .iter()
            .find(|l| l.id == w.level)
            .ok_or_else(|| KitError::invalid(format!("no level spec for {}", w.level)))?;
        let script = build_level_schedule(spec, boundary, seed).map_err(KitError::invalid)?;
        let inside: Vec<PoseSample> =
            samples.iter().filter(|s| s.t >= w.start_t && s.t < w.end_t).cloned().collect();
        let events = replay(&script, &inside, engine, w.start_t).map_err(KitError::invalid)?;
        levels.push(summarize(&events, &script));
    }
    Ok(CompletionSummary { levels })
}

/// APE per (level window, core joint).
pub fn tracking_table(
    est: &[PoseSample],
    reference: &[PoseSample],
    windows: &[(String, mobility_core::session::TimeWindow)],
    joints: &[JointId],
    opts: ApeOptions,
) -> Vec<ApeRow> {
    let mut cells = Vec::new();
    for (task, w) in windows {
        for j in joints {
            cells.push(TrackingCell {
                joint: j.clone(),
                task: task.clone(),
                estimated: extract_trajectory(est, j, *w).ok(),
                reference: extract_trajectory(reference, j, *w).ok(),
            });
        }
    }
    ape_report(&cells, opts)
}

pub fn build_report(inp: &ReportInputs<'_>) -> Result<SessionReport> {
    let completion = completion(inp.samples, inp.segmentation, inp.plan, inp.boundary, inp.seed, inp.engine)?;
    let table = level_metrics(inp.samples, inp.segmentation, &JointId::CORE, inp.metrics);
    let ape = inp.reference.map(|r| {
        let windows: Vec<_> =
            inp.segmentation.windows.iter().map(|w| (w.level.as_str().to_string(), w.window())).collect();
        tracking_table(inp.samples, r, &windows, &JointId::CORE, inp.ape).iter().map(ApeRecord::from).collect()
    });
    let physio = match inp.physio {
        None => None,
        Some(rows) => Some(
            rows.iter()
                .map(|r| Ok(PhysioChange { measure: r.measure.clone(), baseline: r.baseline, percent: r.percent_changes()? }))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    Ok(SessionReport {
        session_id: inp.session_id.clone().unwrap_or_else(|| inp.config_hash[..12].to_string()),
        config_hash: inp.config_hash.clone(),
        tool_version: TOOL_VERSION.into(),
        seed: inp.seed,
        completion,
        metrics: csvio::metrics_records(&table),
        ape,
        physio,
    })
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_else(|| "n/a".into())
}

/// Markdown rendering.
pub fn render_markdown(r: &SessionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Session report {}\n", r.session_id);
    let _ = writeln!(s, "- config hash: `{}`", r.config_hash);
    let _ = writeln!(s, "- tool version: {}", r.tool_version);
    let _ = writeln!(s, "- seed: {}\n", r.seed);

    let _ = writeln!(s, "## Completion\n");
    let _ = writeln!(s, "| level | targets | hit | completion |\n|---|---|---|---|");
    for l in &r.completion.levels {
        let _ = writeln!(s, "| {} | {} | {} | {:.3} |", l.level, l.targets_total, l.targets_hit, l.completion_fraction);
    }

    let _ = writeln!(s, "\n## Movement metrics\n");
    let _ = writeln!(s, "| level | joint | speed (m/s) | ROM (m) | volume (m³) | flags |\n|---|---|---|---|---|---|");
    for m in &r.metrics {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} |",
            m.level,
            m.joint,
            cell(m.mean_speed_mps, 4),
            cell(m.rom_m, 4),
            m.volume_m3.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "n/a".into()),
            m.flags
        );
    }

    if let Some(ape) = &r.ape {
        let _ = writeln!(s, "\n## Tracking error (APE)\n");
        let _ = writeln!(s, "| task | joint | mean (cm) | sd (cm) | max (cm) | n |\n|---|---|---|---|---|---|");
        for a in ape {
            let cm = |v: Option<f64>| cell(v.map(|x| x * 100.0), 2);
            let _ = writeln!(s, "| {} | {} | {} | {} | {} | {} |", a.task, a.joint, cm(a.mean_m), cm(a.sd_m), cm(a.max_m), a.n);
        }
    }

    if let Some(p) = &r.physio {
        let _ = writeln!(s, "\n## Physiological change from baseline (%)\n");
        let _ = writeln!(s, "| measure | baseline | L1 | L2 | L3 | L4 |\n|---|---|---|---|---|---|");
        for m in p {
            let _ = writeln!(
                s,
                "| {} | {} | {:+.1} | {:+.1} | {:+.1} | {:+.1} |",
                m.measure, m.baseline, m.percent[0], m.percent[1], m.percent[2], m.percent[3]
            );
        }
    }
    s
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| KitError::io(path, e))
}

/// `level` rows by `joint` columns for one metric.
fn wide(metrics: &[MetricsRecord], pick: impl Fn(&MetricsRecord) -> Option<f64>) -> String {
    let mut levels: Vec<&str> = Vec::new();
    let mut joints: Vec<&str> = Vec::new();
    for m in metrics {
        if !levels.contains(&m.level.as_str()) {
            levels.push(&m.level);
        }
        if !joints.contains(&m.joint.as_str()) {
            joints.push(&m.joint);
        }
    }
    let mut s = format!("level,{}\n", joints.join(","));
    for l in &levels {
        let vals: Vec<String> = joints
            .iter()
            .map(|j| {
                metrics
                    .iter()
                    .find(|m| m.level == *l && m.joint == *j)
                    .and_then(&pick)
                    .map(|v| v.to_string())
                    .unwrap_or_default()
            })
            .collect();
        let _ = writeln!(s, "{l},{}", vals.join(","));
    }
    s
}

/// Writes `report.md`, `report.json` and `plots/*.csv` under `dir`.
pub fn write_report(dir: &Path, r: &SessionReport) -> Result<()> {
    let plots = dir.join("plots");
    std::fs::create_dir_all(&plots).map_err(|e| KitError::io(&plots, e))?;
    write_text(&dir.join("report.md"), &render_markdown(r))?;
    let json = serde_json::to_string_pretty(r).map_err(KitError::invalid)? + "\n";
    write_text(&dir.join("report.json"), &json)?;

    write_text(&plots.join("speed.csv"), &wide(&r.metrics, |m| m.mean_speed_mps))?;
    write_text(&plots.join("rom.csv"), &wide(&r.metrics, |m| m.rom_m))?;
    write_text(&plots.join("volume.csv"), &wide(&r.metrics, |m| m.volume_m3))?;
    let mut c = String::from("level,completion_fraction\n");
    for l in &r.completion.levels {
        let _ = writeln!(c, "{},{}", l.level, l.completion_fraction);
    }
    write_text(&plots.join("completion.csv"), &c)?;
    if let Some(ape) = &r.ape {
        let mut s = String::from("task,joint,mean_cm,sd_cm\n");
        for a in ape {
            let cm = |v: Option<f64>| v.map(|x| (x * 100.0).to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{}", a.task, a.joint, cm(a.mean_m), cm(a.sd_m));
        }
        write_text(&plots.join("ape.csv"), &s)?;
    }
    if let Some(p) = &r.physio {
        let mut s = String::from("measure,level,percent_change\n");
        for m in p {
            for (i, v) in m.percent.iter().enumerate() {
                let _ = writeln!(s, "{},L{},{}", m.measure, i + 1, v);
            }
        }
        write_text(&plots.join("physio_percent.csv"), &s)?;
    }
    Ok(())
}
