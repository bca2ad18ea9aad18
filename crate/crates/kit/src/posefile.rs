//! Line-delimited pose logs.
//!
//! The first line is a header object, every following non-blank line one
//! sample: `{"t": 0.02, "joints": {"LH": [x, y, z], ...}}`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use mobility_core::{JointId, PoseSample, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT: &str = "mobility-pose";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseHeader {
    pub format: String,
    pub version: u32,
    pub rate_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Default for PoseHeader {
    fn default() -> Self {
        PoseHeader { format: FORMAT.into(), version: VERSION, rate_hz: 50.0, source: None }
    }
}

impl PoseHeader {
    pub fn reference() -> Self {
        PoseHeader { source: Some("reference".into()), ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseLog {
    pub header: PoseHeader,
    pub samples: Vec<PoseSample>,
}

#[derive(Debug, Error)]
pub enum PoseLogError {
    #[error("no samples")]
    NoSamples,
    #[error("line {line}: missing or invalid header: {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: invalid coordinate")]
    InvalidCoordinate { line: usize },
    #[error("time regression at line {line}")]
    TimeRegression { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Deserialize)]
struct RawRecord {
    t: serde_json::Value,
    #[serde(default)]
    joints: BTreeMap<String, Vec<serde_json::Value>>,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    t: f64,
    joints: BTreeMap<&'a str, [f64; 3]>,
}

fn number(v: &serde_json::Value) -> Option<f64> {
    v.as_f64().filter(|x| x.is_finite())
}

fn looks_non_finite(line: &str) -> bool {
    ["NaN", "nan", "Infinity", "inf"].iter().any(|tok| line.contains(tok))
}

fn parse_record(text: &str, line: usize) -> Result<PoseSample, PoseLogError> {
    let raw: RawRecord = serde_json::from_str(text).map_err(|e| {
        if looks_non_finite(text) || e.to_string().contains("out of range") {
            PoseLogError::InvalidCoordinate { line }
        } else {
            PoseLogError::Malformed { line, reason: e.to_string() }
        }
    })?;
    let t = match &raw.t {
        serde_json::Value::Number(_) => number(&raw.t).ok_or(PoseLogError::InvalidCoordinate { line })?,
        serde_json::Value::String(s) if looks_non_finite(s) => return Err(PoseLogError::InvalidCoordinate { line }),
        _ => return Err(PoseLogError::Malformed { line, reason: "`t` must be a number".into() }),
    };
    if t < 0.0 {
        return Err(PoseLogError::Malformed { line, reason: "`t` must be non-negative".into() });
    }
    let mut sample = PoseSample::new(t);
    for (code, coords) in raw.joints {
        if coords.len() != 3 {
            return Err(PoseLogError::Malformed { line, reason: format!("joint {code} needs 3 coordinates") });
        }
        let mut p = [0.0; 3];
        for (slot, c) in p.iter_mut().zip(&coords) {
            *slot = match c {
                serde_json::Value::Number(_) => number(c).ok_or(PoseLogError::InvalidCoordinate { line })?,
                serde_json::Value::String(_) | serde_json::Value::Null => {
                    return Err(PoseLogError::InvalidCoordinate { line })
                }
                _ => return Err(PoseLogError::Malformed { line, reason: format!("joint {code}: not a number") }),
            };
        }
        sample.joints.insert(JointId::from_code(&code), Vec3::new(p[0], p[1], p[2]));
    }
    Ok(sample)
}

fn parse_header(text: &str, line: usize) -> Result<PoseHeader, PoseLogError> {
    let h: PoseHeader =
        serde_json::from_str(text).map_err(|e| PoseLogError::Header { line, reason: e.to_string() })?;
    if h.format != FORMAT || h.version != VERSION {
        return Err(PoseLogError::Header { line, reason: format!("expected format {FORMAT:?} version {VERSION}") });
    }
    if !(h.rate_hz.is_finite() && h.rate_hz > 0.0) {
        return Err(PoseLogError::Header { line, reason: "rate_hz must be positive".into() });
    }
    Ok(h)
}

/// Parses a pose log. Line numbers in errors are 1-based file lines.
pub fn parse_pose_log(reader: impl BufRead) -> Result<PoseLog, PoseLogError> {
    let mut header: Option<PoseHeader> = None;
    let mut samples: Vec<PoseSample> = Vec::new();
    for (i, text) in reader.lines().enumerate() {
        let line = i + 1;
        let text = text?;
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        if header.is_none() {
            header = Some(parse_header(text, line)?);
            continue;
        }
        let s = parse_record(text, line)?;
        if let Some(prev) = samples.last() {
            if s.t <= prev.t {
                return Err(PoseLogError::TimeRegression { line });
            }
        }
        samples.push(s);
    }
    let header = header.ok_or(PoseLogError::NoSamples)?;
    if samples.is_empty() {
        return Err(PoseLogError::NoSamples);
    }
    Ok(PoseLog { header, samples })
}

pub fn read_pose_log(path: &std::path::Path) -> Result<PoseLog, PoseLogError> {
    let f = std::fs::File::open(path)?;
    parse_pose_log(std::io::BufReader::new(f))
}

/// Writes a pose log. Numbers use the shortest round-trip representation.
pub fn write_pose_log(mut w: impl Write, header: &PoseHeader, samples: &[PoseSample]) -> Result<(), PoseLogError> {
    serde_json::to_writer(&mut w, header).map_err(std::io::Error::other)?;
    w.write_all(b"\n")?;
    for s in samples {
        if s.joints.values().any(|p| !p.is_finite()) || !s.t.is_finite() {
            return Err(PoseLogError::Io(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("non-finite value at t = {}", s.t),
            )));
        }
        let rec = OutRecord { t: s.t, joints: s.joints.iter().map(|(j, p)| (j.code(), p.to_array())).collect() };
        serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::other)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_pose_log_file(path: &std::path::Path, header: &PoseHeader, samples: &[PoseSample]) -> Result<(), PoseLogError> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_pose_log(&mut w, header, samples)?;
    w.flush()?;
    Ok(())
}
