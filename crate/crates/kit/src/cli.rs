//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation error (including bad flags), 2 I/O error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mobility_core::game::{
    build_level_schedule, replay, summarize, EngineConfig, SessionPlan, DEFAULT_CAPTURE_RADIUS_M,
};
use mobility_core::kinematics::{level_metrics, MetricsConfig};
use mobility_core::session::{extract_trajectory, fill_gaps, LevelSegmentation, DEFAULT_MAX_GAP_S};
use mobility_core::stats::{friedman_with, posthoc_bonferroni, rm_anova, FriedmanOptions, PairOutcome, PosthocFamily, StatTestResult};
use mobility_core::synth::{generate_population, generate_session, healthy_population, PatientProfile};
use mobility_core::tracking::{ApeOptions, RegistrationMode, DEFAULT_ASSOC_TOL_S};
use mobility_core::{JointId, LevelId, PoseSample};

use crate::config::{self, NamedProfile};
use crate::csvio;
use crate::error::{from_pose, KitError, Result};
use crate::posefile::{self, PoseHeader};
use crate::report::{self, ConfigHasher, ReportInputs};

pub const SEED_ENV: &str = "MOBILITY_KIT_SEED";

#[derive(Debug, Parser)]
#[command(name = "mobility-kit", version, about = "Exergame session simulation and upper-body mobility analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build level scripts, play them with a synthetic patient or a recorded pose log, write events
    Simulate(SimulateArgs),
    /// Per-level speed, range of motion and workspace volume of a pose log
    Analyze(AnalyzeArgs),
    /// Absolute pose error of estimated against reference joint trajectories
    EvalTracking(EvalArgs),
    /// Repeated-measures ANOVA or Friedman test with Bonferroni post-hoc pairs
    Stats(StatsArgs),
    /// Consolidated session report with plot-ready CSV series
    Report(ReportArgs),
    /// Synthetic patient population through every level
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Script seed (integer, no unit); falls back to $MOBILITY_KIT_SEED, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Movement boundary TOML (meters); defaults to the synthetic boundary
    #[arg(long, value_name = "FILE")]
    boundary: Option<PathBuf>,
    /// Level spec TOML (bpm in beats/min, durations in seconds)
    #[arg(long, value_name = "FILE")]
    levels_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Level to play (L1..L4); all configured levels when omitted
    #[arg(long)]
    level: Option<LevelId>,
    /// Recorded pose log to replay (positions in meters, time in seconds); synthesized when omitted
    #[arg(long, value_name = "FILE")]
    pose_log: Option<PathBuf>,
    /// Patient profile TOML (scales unitless, tremor_sd in meters, reaction_delay in seconds); first entry is used
    #[arg(long, value_name = "FILE")]
    profile: Option<PathBuf>,
    /// Hit sphere radius around each hand (meters)
    #[arg(long, default_value_t = DEFAULT_CAPTURE_RADIUS_M)]
    capture_radius: f64,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Pose log to analyze (positions in meters, time in seconds)
    #[arg(long, value_name = "FILE")]
    pose_log: PathBuf,
    /// Level windows CSV `level,start_t,end_t` (seconds); the configured plan when omitted
    #[arg(long, value_name = "FILE")]
    segments: Option<PathBuf>,
    /// Level spec TOML (bpm in beats/min, durations in seconds)
    #[arg(long, value_name = "FILE")]
    levels_config: Option<PathBuf>,
    /// Longest dropout bridged by interpolation (seconds)
    #[arg(long, default_value_t = DEFAULT_MAX_GAP_S)]
    max_gap: f64,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum GroupBy {
    Task,
    None,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Estimated pose log (meters, seconds)
    #[arg(long, value_name = "FILE")]
    est: PathBuf,
    /// Reference pose log (meters, seconds)
    #[arg(long = "ref", value_name = "FILE")]
    reference: PathBuf,
    /// Registration applied before measuring: none, translation or rigid
    #[arg(long, default_value = "none")]
    mode: RegistrationMode,
    /// Largest timestamp difference for a matched pair (seconds)
    #[arg(long, default_value_t = DEFAULT_ASSOC_TOL_S)]
    assoc_tol: f64,
    /// Report cells per task window or over the whole log
    #[arg(long, value_enum, default_value = "none")]
    group_by: GroupBy,
    /// Task windows CSV `task,start_t,end_t` (seconds), required with --group-by task
    #[arg(long, value_name = "FILE")]
    segments: Option<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum TestChoice {
    RmAnova,
    Friedman,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Long-format CSV `subject,condition,value` (value in its own unit)
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Omnibus test
    #[arg(long, value_enum, default_value = "rm-anova")]
    test: TestChoice,
    /// Post-hoc family: paired_t or wilcoxon; omitted means no post-hoc table
    #[arg(long)]
    posthoc: Option<PosthocFamily>,
    /// Apply the Friedman tie correction
    #[arg(long)]
    tie_correction: bool,
    /// Drop subjects with missing conditions instead of failing
    #[arg(long)]
    drop_incomplete: bool,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    common: Common,
    /// Session pose log (meters, seconds)
    #[arg(long, value_name = "FILE")]
    pose_log: PathBuf,
    /// Level windows CSV `level,start_t,end_t` (seconds); the configured plan when omitted
    #[arg(long, value_name = "FILE")]
    segments: Option<PathBuf>,
    /// Hit sphere radius around each hand (meters)
    #[arg(long, default_value_t = DEFAULT_CAPTURE_RADIUS_M)]
    capture_radius: f64,
    /// Longest dropout bridged by interpolation (seconds)
    #[arg(long, default_value_t = DEFAULT_MAX_GAP_S)]
    max_gap: f64,
    /// Reference pose log for the tracking error table (meters, seconds)
    #[arg(long = "ref", value_name = "FILE")]
    reference: Option<PathBuf>,
    /// Registration for the tracking error table: none, translation or rigid
    #[arg(long, default_value = "none")]
    mode: RegistrationMode,
    /// Largest timestamp difference for a matched pair (seconds)
    #[arg(long, default_value_t = DEFAULT_ASSOC_TOL_S)]
    assoc_tol: f64,
    /// Physiological CSV `measure,baseline,L1,L2,L3,L4` (each measure in its own unit)
    #[arg(long, value_name = "FILE")]
    physio: Option<PathBuf>,
    /// Session id; the first 12 hex digits of the config hash when omitted
    #[arg(long)]
    session_id: Option<String>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    /// Patient profile TOML (scales unitless, tremor_sd in meters, reaction_delay in seconds)
    #[arg(long, value_name = "FILE", conflicts_with = "healthy")]
    profiles: Option<PathBuf>,
    /// Number of profiles drawn from the healthy population
    #[arg(long, required_unless_present = "profiles")]
    healthy: Option<usize>,
    /// Also write every generated stream as a pose log
    #[arg(long)]
    pose_logs: bool,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::EvalTracking(a) => eval_tracking(a),
        Command::Stats(a) => stats(a),
        Command::Report(a) => report_cmd(a),
        Command::Gen(a) => gen(a),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| KitError::invalid(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| KitError::io(dir, e))
}

fn read_samples(path: &Path) -> Result<Vec<PoseSample>> {
    Ok(posefile::read_pose_log(path).map_err(|e| from_pose(path, e))?.samples)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(KitError::invalid(format!("--{name} must be a positive number of seconds or meters, got {v}")))
    }
}

fn max_level_duration(plan: &SessionPlan) -> f64 {
    plan.levels.iter().map(|l| l.duration).fold(0.0, f64::max)
}

fn segmentation(segments: Option<&Path>, plan: &SessionPlan) -> Result<LevelSegmentation> {
    match segments {
        Some(p) => csvio::read_segments(p, max_level_duration(plan)),
        None => Ok(plan.segmentation()),
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    check_positive("capture-radius", a.capture_radius)?;
    let seed = resolve_seed(a.common.seed)?;
    let boundary = config::read_boundary(a.common.boundary.as_deref())?;
    let mut plan = config::read_levels(a.common.levels_config.as_deref())?;
    if let Some(id) = a.level {
        plan.levels.retain(|l| l.id == id);
        if plan.levels.is_empty() {
            return Err(KitError::invalid(format!("level {id} is not configured")));
        }
        plan.tutorial_s = 0.0;
    }
    out_dir(&a.out)?;

    let (samples, scripts) = match &a.pose_log {
        Some(p) => {
            let samples = read_samples(p)?;
            let scripts = plan
                .levels
                .iter()
                .map(|s| build_level_schedule(s, &boundary, seed).map_err(KitError::invalid))
                .collect::<Result<Vec<_>>>()?;
            (samples, scripts)
        }
        None => {
            let profile = match &a.profile {
                Some(p) => first_profile(p)?,
                None => PatientProfile { seed, ..PatientProfile::default() },
            };
            let (stream, scripts) = generate_session(&profile, &plan, &boundary, seed).map_err(KitError::invalid)?;
            let path = a.out.join("pose.jsonl");
            posefile::write_pose_log_file(&path, &PoseHeader::default(), &stream.samples).map_err(|e| from_pose(&path, e))?;
            (stream.samples, scripts)
        }
    };

    let engine = EngineConfig { capture_radius: a.capture_radius };
    let mut events = Vec::new();
    let mut completion = Vec::new();
    for (script, start) in scripts.iter().zip(plan.level_starts()) {
        csvio::write_script(&a.out.join(format!("script_{}.jsonl", script.level.id)), script)?;
        let ev = replay(script, &samples, engine, start).map_err(KitError::invalid)?;
        completion.push(summarize(&ev, script));
        events.extend(ev);
    }
    csvio::write_events(&a.out.join("events.jsonl"), &events)?;
    csvio::write_completion(&a.out.join("completion.csv"), &completion)?;
    csvio::write_segments(&a.out.join("segments.csv"), &plan.segmentation())?;
    for c in &completion {
        eprintln!("{}: {}/{} targets", c.level, c.targets_hit, c.targets_total);
    }
    Ok(())
}

fn first_profile(path: &Path) -> Result<PatientProfile> {
    config::read_profiles(path)?
        .into_iter()
        .next()
        .map(|p| p.profile)
        .ok_or_else(|| KitError::file(path, "no [[profile]] entries"))
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    check_positive("max-gap", a.max_gap)?;
    let samples = read_samples(&a.pose_log)?;
    let plan = config::read_levels(a.levels_config.as_deref())?;
    let seg = segmentation(a.segments.as_deref(), &plan)?;
    out_dir(&a.out)?;

    let table = level_metrics(&samples, &seg, &JointId::CORE, MetricsConfig { max_gap: a.max_gap });
    let records = csvio::metrics_records(&table);
    csvio::write_metrics_csv(&a.out.join("metrics.csv"), &records)?;
    csvio::write_jsonl(&a.out.join("metrics.jsonl"), &records)?;

    let mut gaps = Vec::new();
    for w in &seg.windows {
        for j in &JointId::CORE {
            if let Ok(traj) = extract_trajectory(&samples, j, w.window()) {
                gaps.extend(fill_gaps(&traj, a.max_gap).1.split);
            }
        }
    }
    csvio::write_gaps(&a.out.join("gaps.csv"), &gaps)
}

fn eval_tracking(a: EvalArgs) -> Result<()> {
    check_positive("assoc-tol", a.assoc_tol)?;
    let est = read_samples(&a.est)?;
    let reference = read_samples(&a.reference)?;
    let windows = match (a.group_by, &a.segments) {
        (GroupBy::Task, Some(p)) => csvio::read_windows(p)?.into_iter().map(|w| (w.label, w.window)).collect(),
        (GroupBy::Task, None) => return Err(KitError::invalid("--group-by task needs --segments")),
        (GroupBy::None, _) => vec![("all".to_string(), mobility_core::session::TimeWindow::everything())],
    };
    out_dir(&a.out)?;
    let joints = tracked_joints(&reference);
    let rows = report::tracking_table(&est, &reference, &windows, &joints, ApeOptions { mode: a.mode, assoc_tol: a.assoc_tol });
    csvio::write_ape(&a.out.join("ape.csv"), &rows)
}

/// Core joints first, then any other joint in the reference log by code.
fn tracked_joints(samples: &[PoseSample]) -> Vec<JointId> {
    let mut joints: Vec<JointId> = JointId::CORE.to_vec();
    let mut extra: Vec<JointId> = samples
        .iter()
        .flat_map(|s| s.joints.keys().cloned())
        .filter(|j| !JointId::CORE.contains(j))
        .collect();
    extra.sort_by(|a, b| a.code().cmp(b.code()));
    extra.dedup();
    joints.extend(extra);
    joints
}

fn stats(a: StatsArgs) -> Result<()> {
    let (data, subjects) = csvio::read_long(&a.input, a.drop_incomplete)?;
    let result: StatTestResult = match a.test {
        TestChoice::RmAnova => rm_anova(&data),
        TestChoice::Friedman => friedman_with(&data, FriedmanOptions { tie_correction: a.tie_correction }),
    }
    .map_err(|e| KitError::file(&a.input, e))?;
    out_dir(&a.out)?;

    let path = a.out.join("result.csv");
    let mut w = csvio::csv_writer(&path)?;
    let e = |err| crate::error::from_csv(&path, err);
    w.write_record(["test", "statistic", "df1", "df2", "p", "effect", "n_subjects", "k_conditions"]).map_err(e)?;
    let (test, effect) = match a.test {
        TestChoice::RmAnova => ("rm_anova", "partial_eta_squared"),
        TestChoice::Friedman => ("friedman", "kendall_w"),
    };
    w.write_record([
        test.to_string(),
        result.statistic.to_string(),
        result.df1.to_string(),
        result.df2.map(|d| d.to_string()).unwrap_or_default(),
        result.p.to_string(),
        format!("{effect}={}", result.effect.value()),
        subjects.len().to_string(),
        data.conditions().to_string(),
    ])
    .map_err(e)?;
    csvio::finish(&path, w)?;

    let mut summary = format!("{}\n", result.summary());
    if let Some(family) = a.posthoc {
        let table = posthoc_bonferroni(&data, family);
        let path = a.out.join("posthoc.csv");
        let mut w = csvio::csv_writer(&path)?;
        let e = |err| crate::error::from_csv(&path, err);
        w.write_record(["a", "b", "statistic", "p_raw", "p_bonferroni", "significant", "flags"]).map_err(e)?;
        for p in &table.pairs {
            let (a_l, b_l) = (&table.labels[p.a], &table.labels[p.b]);
            let rec = match p.outcome {
                PairOutcome::Tested(t) => [
                    a_l.clone(),
                    b_l.clone(),
                    t.statistic.to_string(),
                    t.p.to_string(),
                    p.p_corrected.map(|v| v.to_string()).unwrap_or_default(),
                    p.significant.to_string(),
                    String::new(),
                ],
                PairOutcome::NoVariability => {
                    [a_l.clone(), b_l.clone(), String::new(), String::new(), String::new(), "false".into(), "no variability".into()]
                }
            };
            w.write_record(rec).map_err(e)?;
            let line = match p.p_corrected {
                Some(pc) => format!("{a_l} vs {b_l}: {}{}\n", mobility_core::stats::format_p(pc), if p.significant { " *" } else { "" }),
                None => format!("{a_l} vs {b_l}: no variability\n"),
            };
            summary.push_str(&line);
        }
        csvio::finish(&path, w)?;
    }
    let path = a.out.join("summary.txt");
    std::fs::write(&path, &summary).map_err(|e| KitError::io(&path, e))?;
    print!("{summary}");
    Ok(())
}

fn report_cmd(a: ReportArgs) -> Result<()> {
    check_positive("capture-radius", a.capture_radius)?;
    check_positive("max-gap", a.max_gap)?;
    check_positive("assoc-tol", a.assoc_tol)?;
    let seed = resolve_seed(a.common.seed)?;
    let boundary = config::read_boundary(a.common.boundary.as_deref())?;
    let plan = config::read_levels(a.common.levels_config.as_deref())?;
    let seg = segmentation(a.segments.as_deref(), &plan)?;
    let samples = read_samples(&a.pose_log)?;
    let reference = a.reference.as_deref().map(read_samples).transpose()?;
    let physio = a.physio.as_deref().map(csvio::read_physio).transpose()?;

    let mut h = ConfigHasher::new();
    h.file("pose_log", &a.pose_log)?;
    for (name, path) in [
        ("segments", &a.segments),
        ("levels", &a.common.levels_config),
        ("boundary", &a.common.boundary),
        ("reference", &a.reference),
        ("physio", &a.physio),
    ] {
        if let Some(p) = path {
            h.file(name, p)?;
        }
    }
    let options = format!(
        "seed={seed};capture_radius={};max_gap={};mode={};assoc_tol={}",
        a.capture_radius, a.max_gap, a.mode, a.assoc_tol
    );
    h.field("options", options.as_bytes());
    h.field("boundary_resolved", config::boundary_toml(&boundary).as_bytes());

    let inputs = ReportInputs {
        samples: &samples,
        segmentation: &seg,
        plan: &plan,
        boundary: &boundary,
        seed,
        engine: EngineConfig { capture_radius: a.capture_radius },
        metrics: MetricsConfig { max_gap: a.max_gap },
        reference: reference.as_deref(),
        ape: ApeOptions { mode: a.mode, assoc_tol: a.assoc_tol },
        physio: physio.as_deref(),
        config_hash: h.finish(),
        session_id: a.session_id,
    };
    let r = report::build_report(&inputs)?;
    out_dir(&a.out)?;
    report::write_report(&a.out, &r)
}

fn gen(a: GenArgs) -> Result<()> {
    let seed = resolve_seed(a.common.seed)?;
    let boundary = config::read_boundary(a.common.boundary.as_deref())?;
    let plan = config::read_levels(a.common.levels_config.as_deref())?;
    let named: Vec<NamedProfile> = match (&a.profiles, a.healthy) {
        (Some(p), _) => config::read_profiles(p)?,
        (None, Some(n)) => healthy_population(n, seed)
            .into_iter()
            .enumerate()
            .map(|(i, profile)| NamedProfile { name: format!("S{:02}", i + 1), profile })
            .collect(),
        (None, None) => return Err(KitError::invalid("either --profiles or --healthy is required")),
    };
    if named.is_empty() {
        return Err(KitError::invalid("no profiles to generate"));
    }
    let profiles: Vec<PatientProfile> = named.iter().map(|p| p.profile).collect();
    let cells = generate_population(&profiles, &plan.levels, &boundary, seed).map_err(KitError::invalid)?;
    out_dir(&a.out)?;

    let rows: Vec<_> = cells.iter().flat_map(|c| c.rows.iter().cloned()).collect();
    csvio::write_population(&a.out.join("population.csv"), &rows)?;

    let long = a.out.join("long");
    out_dir(&long)?;
    type Pick = fn(&mobility_core::synth::PopulationRow) -> Option<f64>;
    let metrics: [(&str, Pick); 3] =
        [("speed", |r| r.mean_speed), ("rom", |r| r.rom), ("volume", |r| r.volume)];
    for joint in &JointId::CORE {
        for (metric, pick) in metrics {
            let cells = rows.iter().filter(|r| &r.joint == joint).filter_map(|r| {
                pick(r).map(|v| (named[r.subject].name.clone(), r.level.as_str().to_string(), v))
            });
            csvio::write_long(&long.join(format!("{metric}_{}.csv", joint.code())), cells)?;
        }
    }

    if a.pose_logs {
        let dir = a.out.join("poses");
        out_dir(&dir)?;
        for c in &cells {
            let level = c.stream.levels[0];
            let path = dir.join(format!("{}_{level}.jsonl", named[c.subject].name));
            let header = PoseHeader { source: Some(format!("synthetic:{}", named[c.subject].name)), ..PoseHeader::default() };
            posefile::write_pose_log_file(&path, &header, &c.stream.samples).map_err(|e| from_pose(&path, e))?;
        }
    }
    eprintln!("{} profiles x {} levels", named.len(), plan.levels.len());
    Ok(())
}
