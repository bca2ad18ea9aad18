//! CSV and line-delimited table formats.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mobility_core::game::{LevelCompletion, SessionEvent, TargetScript};
use mobility_core::kinematics::MetricsTable;
use mobility_core::session::{Gap, LevelSegmentation, LevelWindow, TimeWindow};
use mobility_core::stats::{self, RepeatedMeasures};
use mobility_core::synth::PopulationRow;
use mobility_core::tracking::ApeRow;
use mobility_core::LevelId;
use serde::{Deserialize, Serialize};

use crate::error::{from_csv, KitError, Result};

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| KitError::io(path, e))
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let f = File::open(path).map_err(|e| KitError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(f))
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

pub fn finish<W: Write>(path: &Path, w: csv::Writer<W>) -> Result<()> {
    let mut inner = w.into_inner().map_err(|e| KitError::io(path, e.into_error()))?;
    inner.flush().map_err(|e| KitError::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One labeled time window (`level,start_t,end_t` or `task,start_t,end_t`).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    pub label: String,
    pub window: TimeWindow,
}

#[derive(Deserialize)]
struct WindowRecord {
    #[serde(alias = "level", alias = "task")]
    label: String,
    start_t: f64,
    end_t: f64,
}

pub fn read_windows(path: &Path) -> Result<Vec<LabeledWindow>> {
    let mut rdr = open_csv(path)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<WindowRecord>().enumerate() {
        let r = rec.map_err(|e| from_csv(path, e))?;
        if !(r.start_t.is_finite() && r.end_t.is_finite() && r.start_t < r.end_t) {
            return Err(KitError::file(path, format!("row {}: window must satisfy start_t < end_t", i + 1)));
        }
        out.push(LabeledWindow { label: r.label, window: TimeWindow::new(r.start_t, r.end_t) });
    }
    if out.is_empty() {
        return Err(KitError::file(path, "no windows"));
    }
    Ok(out)
}

/// Reads `level,start_t,end_t`; each window may last at most `max_duration + 1` s.
pub fn read_segments(path: &Path, max_duration: f64) -> Result<LevelSegmentation> {
    let windows = read_windows(path)?
        .into_iter()
        .map(|w| {
            let level: LevelId = w.label.parse().map_err(|e| KitError::file(path, e))?;
            Ok(LevelWindow { level, start_t: w.window.start, end_t: w.window.end })
        })
        .collect::<Result<Vec<_>>>()?;
    LevelSegmentation::new(windows, max_duration).map_err(|e| KitError::file(path, e))
}

pub fn write_segments(path: &Path, seg: &LevelSegmentation) -> Result<()> {
    let mut w = csv_writer(path)?;
    let e = |err| from_csv(path, err);
    w.write_record(["level", "start_t", "end_t"]).map_err(e)?;
    for win in &seg.windows {
        w.write_record([win.level.as_str().to_string(), win.start_t.to_string(), win.end_t.to_string()])
            .map_err(e)?;
    }
    finish(path, w)
}

pub fn write_gaps(path: &Path, gaps: &[Gap]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let e = |err| from_csv(path, err);
    w.write_record(["joint", "start_t", "end_t", "duration"]).map_err(e)?;
    for g in gaps {
        w.write_record([g.joint.code().to_string(), g.start_t.to_string(), g.end_t.to_string(), g.duration().to_string()])
            .map_err(e)?;
    }
    finish(path, w)
}

/// Flat metrics row shared by the CSV and JSONL forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub level: String,
    pub joint: String,
    pub mean_speed_mps: Option<f64>,
    pub rom_m: Option<f64>,
    pub volume_m3: Option<f64>,
    pub flags: String,
}

pub fn metrics_records(table: &MetricsTable) -> Vec<MetricsRecord> {
    table
        .rows
        .iter()
        .map(|r| MetricsRecord {
            level: r.level.as_str().into(),
            joint: r.joint.code().into(),
            mean_speed_mps: r.speed.as_ref().ok().map(|s| s.mean_speed),
            rom_m: r.rom.as_ref().ok().map(|s| s.rom),
            volume_m3: r.workspace.as_ref().ok().map(|w| w.volume),
            flags: r.flags().join(";"),
        })
        .collect()
}

pub fn write_metrics_csv(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let e = |err| from_csv(path, err);
    w.write_record(["level", "joint", "mean_speed_mps", "rom_m", "volume_m3", "flags"]).map_err(e)?;
    for r in records {
        w.write_record([
            r.level.clone(),
            r.joint.clone(),
            opt(r.mean_speed_mps),
            opt(r.rom_m),
            opt(r.volume_m3),
            r.flags.clone(),
        ])
        .map_err(e)?;
    }
    finish(path, w)
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRecord>> {
    let mut rdr = open_csv(path)?;
    rdr.deserialize().map(|r| r.map_err(|e| from_csv(path, e))).collect()
}

/// One JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(|e| KitError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| KitError::io(path, e))?;
    }
    w.flush().map_err(|e| KitError::io(path, e))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| KitError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| KitError::file(path, format!("line {}: {e}", i + 1))))
        .collect()
}

/// Script header line followed by one line per target.
pub fn write_script(path: &Path, script: &TargetScript) -> Result<()> {
    #[derive(Serialize)]
    struct Head<'a> {
        level: &'a mobility_core::game::LevelSpec,
        boundary: &'a mobility_core::game::MovementBoundary,
        seed: u64,
        targets: usize,
        content_hash: String,
    }
    let head = serde_json::to_value(Head {
        level: &script.level,
        boundary: &script.boundary,
        seed: script.seed,
        targets: script.events.len(),
        content_hash: format!("{:016x}", script.content_hash()),
    })
    .map_err(KitError::invalid)?;
    let events = script.events.iter().map(|e| serde_json::to_value(e).unwrap_or_default());
    write_jsonl(path, std::iter::once(head).chain(events))
}

pub fn write_events(path: &Path, events: &[SessionEvent]) -> Result<()> {
    write_jsonl(path, events)
}

pub fn write_completion(path: &Path, levels: &[LevelCompletion]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let e = |err| from_csv(path, err);
    w.write_record(["level", "targets_total", "targets_hit", "completion_fraction"]).map_err(e)?;
    for l in levels {
        w.write_record([
            l.level.as_str().to_string(),
            l.targets_total.to_string(),
            l.targets_hit.to_string(),
            l.completion_fraction.to_string(),
        ])
        .map_err(e)?;
    }
    finish(path, w)
}

#[derive(Deserialize)]
struct LongRecord {
    subject: String,
    condition: String,
    value: f64,
}

/// Pivots `subject,condition,value` into a complete matrix. Subjects and
/// conditions keep their order of first appearance. With `drop_incomplete`
/// subjects missing a condition are removed instead of rejected.
pub fn read_long(path: &Path, drop_incomplete: bool) -> Result<(RepeatedMeasures, Vec<String>)> {
    let mut rdr = open_csv(path)?;
    let mut subjects: Vec<String> = Vec::new();
    let mut conditions: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, rec) in rdr.deserialize::<LongRecord>().enumerate() {
        let r = rec.map_err(|e| from_csv(path, e))?;
        if !r.value.is_finite() {
            return Err(KitError::file(path, format!("row {}: non-finite value", i + 1)));
        }
        let si = index_of(&mut subjects, r.subject);
        let ci = index_of(&mut conditions, r.condition);
        if cells.insert((si, ci), r.value).is_some() {
            return Err(KitError::file(
                path,
                format!("row {}: duplicate cell ({}, {})", i + 1, subjects[si], conditions[ci]),
            ));
        }
    }
    let k = conditions.len();
    let mut kept = Vec::new();
    let mut values = Vec::new();
    for (si, name) in subjects.iter().enumerate() {
        let row: Option<Vec<f64>> = (0..k).map(|ci| cells.get(&(si, ci)).copied()).collect();
        match row {
            Some(r) => {
                values.extend(r);
                kept.push(name.clone());
            }
            None if drop_incomplete => {}
            None => {
                let missing = (0..k).find(|ci| !cells.contains_key(&(si, *ci))).unwrap_or(0);
                return Err(KitError::file(
                    path,
                    format!("subject {name} has no value for condition {}", conditions[missing]),
                ));
            }
        }
    }
    let n = kept.len();
    let data = RepeatedMeasures::new(values, n, k, conditions).map_err(|e| KitError::file(path, e))?;
    Ok((data, kept))
}

fn index_of(list: &mut Vec<String>, name: String) -> usize {
    match list.iter().position(|x| *x == name) {
        Some(i) => i,
        None => {
            list.push(name);
            list.len() - 1
        }
    }
}

pub fn write_long(path: &Path, rows: impl IntoIterator<Item = (String, String, f64)>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let e = |err| from_csv(path, err);
    w.write_record(["subject", "condition", "value"]).map_err(e)?;
    for (s, c, v) in rows {
        w.write_record([s, c, v.to_string()]).map_err(e)?;
    }
    finish(path, w)
}

/// `measure,baseline,L1,L2,L3,L4`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PhysioRow {
    pub measure: String,
    pub baseline: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "L3")]
    pub l3: f64,
    #[serde(rename = "L4")]
    pub l4: f64,
}

impl PhysioRow {
    pub fn levels(&self) -> [f64; 4] {
        [self.l1, self.l2, self.l3, self.l4]
    }

    /// Percent change from baseline per level.
    pub fn percent_changes(&self) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (o, v) in out.iter_mut().zip(self.levels()) {
            *o = stats::percent_change(self.baseline, v)
                .map_err(|e| KitError::invalid(format!("{}: {e}", self.measure)))?;
        }
        Ok(out)
    }
}

pub fn read_physio(path: &Path) -> Result<Vec<PhysioRow>> {
    let mut rdr = open_csv(path)?;
    let rows: Vec<PhysioRow> = rdr.deserialize().map(|r| r.map_err(|e| from_csv(path, e))).collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(KitError::file(path, "no measures"));
    }
    Ok(rows)
}

pub fn write_population(path: &Path, rows: &[PopulationRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let e = |err| from_csv(path, err);
    w.write_record(["subject", "level", "joint", "mean_speed_mps", "rom_m", "volume_m3"]).map_err(e)?;
    for r in rows {
        w.write_record([
            format!("S{:02}", r.subject + 1),
            r.level.as_str().into(),
            r.joint.code().into(),
            opt(r.mean_speed),
            opt(r.rom),
            opt(r.volume),
        ])
        .map_err(e)?;
    }
    finish(path, w)
}

pub fn write_ape(path: &Path, rows: &[ApeRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let e = |err| from_csv(path, err);
    w.write_record(["task", "joint", "mean_m", "sd_m", "rmse_m", "max_m", "n", "flags"]).map_err(e)?;
    for r in rows {
        let rec = match &r.stats {
            Ok(s) => [
                r.task.clone(),
                r.joint.code().into(),
                s.mean.to_string(),
                s.sd.to_string(),
                s.rmse.to_string(),
                s.max.to_string(),
                s.n.to_string(),
                String::new(),
            ],
            Err(reason) => [
                r.task.clone(),
                r.joint.code().into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "0".into(),
                format!("empty: {reason}"),
            ],
        };
        w.write_record(rec).map_err(e)?;
    }
    finish(path, w)
}
