//! Acceptance criteria 1-8. Each test prints one `acceptance` line to the
//! real stdout so the verdicts show even when output is captured.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use mobility_core::game::{
    build_level_schedule, replay, summarize, EngineConfig, EventKind, LevelSpec, MovementBoundary, MovementType,
    SessionPlan, TargetKind,
};
use mobility_core::kinematics::{convex_hull, mean_speed, range_of_motion, workspace_volume, MetricsConfig};
use mobility_core::math::rotate;
use mobility_core::session::{LevelSegmentation, TimeWindow, TimedPoint};
use mobility_core::stats::special::chi2_sf;
use mobility_core::stats::{friedman, rm_anova, RepeatedMeasures};
use mobility_core::synth::{circle_task, generate_population, generate_session, healthy_population, PatientProfile};
use mobility_core::tracking::{ape, associate, register, ApeOptions, RegistrationMode, RigidTransform};
use mobility_core::{JointId, JointTrajectory, LevelId, PoseSample, Vec3};
use mobility_kit::report::{self, ReportInputs};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

struct Criterion {
    id: u8,
    name: &'static str,
    budget_s: f64,
    start: Instant,
    checks: Vec<(String, bool)>,
}

impl Criterion {
    fn new(id: u8, name: &'static str, budget_s: f64) -> Self {
        Criterion { id, name, budget_s, start: Instant::now(), checks: Vec::new() }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    fn finish(mut self) {
        let elapsed = self.start.elapsed().as_secs_f64();
        self.check(format!("runtime {elapsed:.2} s < {} s", self.budget_s), elapsed < self.budget_s);
        let failed: Vec<&str> = self.checks.iter().filter(|(_, ok)| !ok).map(|(w, _)| w.as_str()).collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        let detail = if failed.is_empty() {
            format!("{} checks", self.checks.len())
        } else {
            format!("failed: {}", failed.join("; "))
        };
        let line = format!("acceptance criterion {} ({}): {verdict} [{detail}] ({elapsed:.2} s)\n", self.id, self.name);
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(line.as_bytes());
        let _ = out.flush();
        assert!(failed.is_empty(), "criterion {}: {}", self.id, failed.join("; "));
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn criterion_1_level_table() {
    let mut c = Criterion::new(1, "level table and schedule", 1.0);
    let want = [
        (77.0, MovementType::Wrist, (4.0, 6.0)),
        (105.0, MovementType::Lateral, (6.0, 8.0)),
        (112.0, MovementType::Bilateral, (8.0, 10.0)),
        (140.0, MovementType::Overhead, (10.0, 12.0)),
    ];
    for (spec, (bpm, mt, holds)) in LevelSpec::defaults().iter().zip(want) {
        let ok = spec.bpm == bpm && spec.movement_type == mt && spec.hold_range == holds && spec.duration == 120.0;
        c.check(format!("{} defaults", spec.id), ok);
    }
    let b = MovementBoundary::synthetic_default();
    let (mut worst_beat, mut bad_holds, mut events) = (0.0f64, 0usize, 0usize);
    for seed in 0..20 {
        for spec in LevelSpec::defaults() {
            let s = build_level_schedule(&spec, &b, seed).unwrap();
            let beat = 60.0 / spec.bpm;
            for e in &s.events {
                events += 1;
                worst_beat = worst_beat.max((e.appear_t - (e.appear_t / beat).round() * beat).abs());
                if e.kind == TargetKind::Hold {
                    let h = e.hold_duration.unwrap();
                    if !(h >= spec.hold_range.0 && h <= spec.hold_range.1) {
                        bad_holds += 1;
                    }
                }
            }
        }
    }
    c.check(format!("beat alignment {worst_beat:.1e} s <= 1e-9 s over {events} events"), worst_beat <= 1e-9);
    c.check(format!("{bad_holds} holds outside their range"), bad_holds == 0);
    c.finish();
}

/// Facet planes rebuilt from hull vertices, after checking they support every input point.
fn supporting_planes(points: &[Vec3]) -> Option<(f64, f64, Vec<(Vec3, f64)>)> {
    let outcome = convex_hull(points).ok()?;
    let h = outcome.solid()?;
    let mut planes = Vec::new();
    for f in &h.facets {
        let [a, b, c] = f.indices.map(|i| h.vertices[i]);
        let n = (b - a).cross(c - a);
        let n = n / n.norm();
        let d = n.dot(a);
        if points.iter().any(|p| n.dot(*p) - d > 1e-9) {
            return None;
        }
        planes.push((n, d));
    }
    Some((h.volume(), h.signed_volume_about_origin(), planes))
}

/// Counts uniform unit-cube draws on the inner side of every plane.
fn count_inside(planes: &[(Vec3, f64)], draws: usize, rng: &mut ChaCha8Rng) -> usize {
    let (nx, ny, nz, d): (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) =
        planes.iter().fold(Default::default(), |mut acc, (n, d)| {
            acc.0.push(n.x);
            acc.1.push(n.y);
            acc.2.push(n.z);
            acc.3.push(*d);
            acc
        });
    const LANES: usize = 8;
    let mut inside = 0;
    for _ in 0..draws / LANES {
        let mut p = [[0.0f64; LANES]; 3];
        for l in 0..LANES {
            for axis in &mut p {
                axis[l] = rng.random();
            }
        }
        let mut worst = [f64::MIN; LANES];
        for i in 0..d.len() {
            for l in 0..LANES {
                let v = nx[i] * p[0][l] + ny[i] * p[1][l] + nz[i] * p[2][l] - d[i];
                worst[l] = if v > worst[l] { v } else { worst[l] };
            }
        }
        inside += worst.iter().filter(|&&w| w <= 0.0).count();
    }
    inside
}

#[test]
fn criterion_2_geometry_oracles() {
    let mut c = Criterion::new(2, "hull geometry oracles", 10.0);
    let cube: Vec<Vec3> = (0..8).map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64)).collect();
    let v = convex_hull(&cube).unwrap().solid().unwrap().volume();
    c.check(format!("unit cube {v}"), (v - 1.0).abs() <= 1e-12);
    let tet = [Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
    let v = convex_hull(&tet).unwrap().solid().unwrap().volume();
    c.check(format!("unit tetrahedron {v}"), (v - 1.0 / 6.0).abs() <= 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..20 {
        let pts: Vec<Vec3> = (0..200).map(|_| Vec3::new(rng.random(), rng.random(), rng.random())).collect();
        let Some((vol, div, planes)) = supporting_planes(&pts) else {
            c.check(format!("cloud {k}: hull facets do not support the input"), false);
            continue;
        };
        let draws = 1_000_000;
        let inside = count_inside(&planes, draws, &mut rng);
        let mc = inside as f64 / draws as f64;
        c.check(format!("cloud {k}: hull {vol:.5} vs Monte Carlo {mc:.5}"), (vol - mc).abs() / mc < 0.02);
        c.check(format!("cloud {k}: divergence form {div} vs pyramids {vol}"), rel(vol, div) <= 1e-9);
    }
    c.finish();
}

fn random_walk(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec3> {
    let step = Normal::new(0.0, 0.01).unwrap();
    let mut p = Vec3::new(rng.random(), rng.random(), rng.random());
    (0..n)
        .map(|_| {
            p += Vec3::new(step.sample(rng), step.sample(rng), step.sample(rng));
            p
        })
        .collect()
}

fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let n = Normal::new(0.0, 1.0).unwrap();
    let q: Vec<f64> = (0..4).map(|_| n.sample(rng)).collect();
    let len = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (w, x, y, z) = (q[0] / len, q[1] / len, q[2] / len, q[3] / len);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn metrics(points: &[Vec3]) -> [f64; 3] {
    let t = JointTrajectory::from_positions(JointId::LeftHand, points, 50.0).unwrap();
    [mean_speed(&t).unwrap().mean_speed, range_of_motion(&t).rom, workspace_volume(&t).unwrap().volume]
}

#[test]
fn criterion_3_metric_invariance() {
    let mut c = Criterion::new(3, "metric invariance", 5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = [0.0f64; 3];
    for _ in 0..100 {
        let pts = random_walk(&mut rng, 300);
        let r = random_rotation(&mut rng);
        let t = Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let s: f64 = rng.random_range(0.1..10.0);
        let base = metrics(&pts);
        let moved = metrics(&pts.iter().map(|&p| rotate(&r, p) + t).collect::<Vec<_>>());
        let scaled = metrics(&pts.iter().map(|&p| p * s).collect::<Vec<_>>());
        worst[0] = worst[0].max((0..3).map(|i| rel(base[i], moved[i])).fold(0.0, f64::max));
        worst[1] = worst[1].max(rel(base[0] * s, scaled[0]).max(rel(base[1] * s, scaled[1])));
        worst[2] = worst[2].max(rel(base[2] * s * s * s, scaled[2]));
    }
    c.check(format!("rigid motion invariance, worst rel {:.1e}", worst[0]), worst[0] <= 1e-9);
    c.check(format!("speed and ROM scale by s, worst rel {:.1e}", worst[1]), worst[1] <= 1e-9);
    c.check(format!("volume scales by s^3, worst rel {:.1e}", worst[2]), worst[2] <= 1e-9);
    c.finish();
}

fn traj(points: &[Vec3]) -> JointTrajectory {
    let s = points.iter().enumerate().map(|(i, &p)| TimedPoint { t: i as f64 * 0.02, p }).collect();
    JointTrajectory::new(JointId::RightHand, s).unwrap()
}

#[test]
fn criterion_4_ape_sanity() {
    let mut c = Criterion::new(4, "APE sanity", 5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts = random_walk(&mut rng, 500);
    let pair = associate(&traj(&pts), &traj(&pts), 0.01).unwrap();
    let s = ape(&pair, &RigidTransform::identity()).unwrap();
    c.check(format!("identical: mean {} max {}", s.mean, s.max), s.mean == 0.0 && s.max == 0.0);

    let dir = Vec3::new(0.3, -1.0, 0.7);
    let off = dir / dir.norm() * 0.03;
    let shifted: Vec<Vec3> = pts.iter().map(|&p| p + off).collect();
    let pair = associate(&traj(&shifted), &traj(&pts), 0.01).unwrap();
    let s = ape(&pair, &RigidTransform::identity()).unwrap();
    c.check(format!("offset: mean {} sd {}", s.mean, s.sd), (s.mean - 0.03).abs() <= 1e-12 && s.sd <= 1e-12);

    let r = random_rotation(&mut rng);
    let t = Vec3::new(0.4, -0.2, 1.1);
    let rt = [[r[0][0], r[1][0], r[2][0]], [r[0][1], r[1][1], r[2][1]], [r[0][2], r[1][2], r[2][2]]];
    let est: Vec<Vec3> = pts.iter().map(|&p| rotate(&rt, p - t)).collect();
    let pair = associate(&traj(&est), &traj(&pts), 0.01).unwrap();
    let fit = register(&pair, RegistrationMode::Rigid).unwrap();
    let mut err = (fit.translation - t).norm();
    for i in 0..3 {
        for j in 0..3 {
            err = err.max((fit.rotation[i][j] - r[i][j]).abs());
        }
    }
    c.check(format!("rigid recovery error {err:.1e}"), err <= 1e-6);

    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut violations = 0;
    for _ in 0..50 {
        let a = random_walk(&mut rng, 200);
        let r = random_rotation(&mut rng);
        let b: Vec<Vec3> = a
            .iter()
            .map(|&p| rotate(&r, p) + Vec3::new(0.05, 0.1, -0.2) + Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng)))
            .collect();
        let pair = associate(&traj(&b), &traj(&a), 0.01).unwrap();
        let rmse = |m| ape(&pair, &register(&pair, m).unwrap()).unwrap().rmse;
        let (n, tr, rg) = (rmse(RegistrationMode::None), rmse(RegistrationMode::Translation), rmse(RegistrationMode::Rigid));
        if !(rg <= tr + 1e-12 && tr <= n + 1e-12) {
            violations += 1;
        }
    }
    c.check(format!("nesting rigid <= translation <= none: {violations} of 50 violate"), violations == 0);
    c.finish();
}

#[test]
fn criterion_5_tracking_ordering() {
    let mut c = Criterion::new(5, "tracking error ordering", 5.0);
    let b = MovementBoundary::synthetic_default();
    let profile = PatientProfile::perfect(5);
    // four 30 s levels and two circle tasks on one clock
    let plan = SessionPlan {
        tutorial_s: 0.0,
        levels: LevelSpec::defaults().map(|s| LevelSpec { duration: 30.0, ..s }).to_vec(),
    };
    let (stream, _) = generate_session(&profile, &plan, &b, 5).unwrap();
    let mut reference = stream.samples;
    let mut tasks: Vec<(String, TimeWindow)> =
        plan.segmentation().windows.iter().map(|w| (w.level.to_string(), w.window())).collect();
    let mut t0 = plan.total_duration();
    for (name, period) in [("M1", 6.0), ("M2", 2.0)] {
        reference.extend(circle_task(&profile, &b, period, 30.0, t0).unwrap());
        tasks.push((name.into(), TimeWindow::new(t0, t0 + 30.0)));
        t0 += 30.0;
    }

    // target mean error per joint class, meters
    let magnitude = |j: &JointId| match j {
        JointId::LeftShoulder | JointId::RightShoulder => 0.015,
        JointId::LeftHand | JointId::RightHand => 0.05,
        _ => 0.11,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    // mean norm of an isotropic 3D Gaussian is sigma * sqrt(8 / pi)
    let k = (8.0 / std::f64::consts::PI).sqrt();
    let estimate: Vec<PoseSample> = reference
        .iter()
        .map(|s| {
            let mut e = s.clone();
            for (j, p) in e.joints.iter_mut() {
                let n = Normal::new(0.0, magnitude(j) / k).unwrap();
                *p += Vec3::new(n.sample(&mut rng), n.sample(&mut rng), n.sample(&mut rng));
            }
            e
        })
        .collect();

    let rows = report::tracking_table(&estimate, &reference, &tasks, &JointId::CORE, ApeOptions::default());
    let mut by_task: BTreeMap<String, Vec<(JointId, f64)>> = BTreeMap::new();
    for r in &rows {
        match &r.stats {
            Ok(s) => by_task.entry(r.task.clone()).or_default().push((r.joint.clone(), s.mean)),
            Err(e) => c.check(format!("{} {}: {e}", r.task, r.joint), false),
        }
    }
    for (task, cells) in &by_task {
        let class = |f: fn(&JointId) -> bool| cells.iter().filter(|(j, _)| f(j)).map(|(_, m)| *m).collect::<Vec<_>>();
        let shoulders = class(|j| matches!(j, JointId::LeftShoulder | JointId::RightShoulder));
        let hands = class(|j| j.is_hand());
        let elbows = class(|j| matches!(j, JointId::LeftElbow | JointId::RightElbow));
        let max = |v: &[f64]| v.iter().copied().fold(f64::MIN, f64::max);
        let min = |v: &[f64]| v.iter().copied().fold(f64::MAX, f64::min);
        let ok = shoulders.len() == 2 && hands.len() == 2 && elbows.len() == 2 && max(&shoulders) < min(&hands) && max(&hands) < min(&elbows);
        c.check(format!("{task}: shoulders {shoulders:.4?} < hands {hands:.4?} < elbows {elbows:.4?}"), ok);
    }
    c.check(format!("{} task cells", by_task.len()), by_task.len() == 6);
    c.finish();
}

fn oracle_f(rows: &[Vec<f64>]) -> f64 {
    let (n, k) = (rows.len(), rows[0].len());
    let grand = rows.iter().flatten().sum::<f64>() / (n * k) as f64;
    let rm: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() / k as f64).collect();
    let cm: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let ss_c: f64 = cm.iter().map(|m| n as f64 * (m - grand).powi(2)).sum();
    let ss_e: f64 = (0..n).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| (rows[i][j] - rm[i] - cm[j] + grand).powi(2)).sum();
    (ss_c / (k - 1) as f64) / (ss_e / ((n - 1) * (k - 1)) as f64)
}

#[test]
fn criterion_6_statistics_oracles() {
    let mut c = Criterion::new(6, "statistics oracles", 30.0);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let z = Normal::new(0.0, 1.0).unwrap();

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let rows: Vec<Vec<f64>> = (0..10).map(|_| vec![z.sample(&mut rng), z.sample(&mut rng) + 0.3]).collect();
        let d: Vec<f64> = rows.iter().map(|r| r[0] - r[1]).collect();
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let sd = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let t = mean / (sd / n.sqrt());
        let f = rm_anova(&RepeatedMeasures::from_rows(&rows).unwrap()).unwrap().statistic;
        worst = worst.max(rel(f, t * t));
    }
    c.check(format!("k = 2: F vs t^2 worst rel {worst:.1e}"), worst <= 1e-9);

    let perfect: Vec<Vec<f64>> = (0..5).map(|i| (0..4).map(|j| (j * 10 + i) as f64).collect()).collect();
    let chi = friedman(&RepeatedMeasures::from_rows(&perfect).unwrap()).unwrap().statistic;
    c.check(format!("perfect agreement chi2 {chi} = n(k-1) = 15"), chi == 15.0);

    let p = chi2_sf(9.488, 4.0);
    c.check(format!("chi2(4) upper tail at 9.488 = {p:.10}, |p - 0.05| = {:.1e} <= 1e-6", (p - 0.05).abs()), (p - 0.05).abs() <= 1e-6);
    let p_exact = chi2_sf(9.487729036781158, 4.0);
    c.check(format!("chi2(4) upper tail at its 0.05 critical value = {p_exact:.12}"), (p_exact - 0.05).abs() <= 1e-12);

    let rows: Vec<Vec<f64>> = (0..5).map(|_| (0..4).map(|_| z.sample(&mut rng)).collect()).collect();
    let p = rm_anova(&RepeatedMeasures::from_rows(&rows).unwrap()).unwrap().p;
    let f_obs = oracle_f(&rows);
    let draws = 100_000;
    let mut perm = rows.clone();
    let hits = (0..draws)
        .filter(|_| {
            for r in perm.iter_mut() {
                r.shuffle(&mut rng);
            }
            oracle_f(&perm) >= f_obs - 1e-12
        })
        .count();
    let p_perm = hits as f64 / draws as f64;
    c.check(format!("5x4 fixture: F-test p {p:.4} vs permutation p {p_perm:.4}"), (p - p_perm).abs() < 0.01);
    c.finish();
}

#[test]
fn criterion_7_progression() {
    let mut c = Criterion::new(7, "end-to-end progression", 60.0);
    let b = MovementBoundary::synthetic_default();
    let profiles = healthy_population(13, 7);
    let specs = LevelSpec::defaults();
    let cells = generate_population(&profiles, &specs, &b, 7).unwrap();
    c.check(format!("{} streams", cells.len()), cells.len() == 52);

    let hands = [JointId::LeftHand, JointId::RightHand];
    let value = |subject: usize, level: LevelId, joint: &JointId, metric: usize| -> f64 {
        let row = cells.iter().flat_map(|c| &c.rows).find(|r| r.subject == subject && r.level == level && &r.joint == joint).unwrap();
        [row.mean_speed, row.rom, row.volume][metric].unwrap_or(f64::NAN)
    };
    for joint in &hands {
        for (metric, name) in ["speed", "ROM", "volume"].iter().enumerate() {
            let means: Vec<f64> =
                LevelId::ALL.iter().map(|&l| (0..13).map(|s| value(s, l, joint, metric)).sum::<f64>() / 13.0).collect();
            let increasing = means.windows(2).all(|w| w[1] > w[0]);
            c.check(format!("{joint} {name} by level {means:.4?} strictly increasing"), increasing);
            if metric == 0 {
                let (l1, l4) = (means[0], means[3]);
                c.check(format!("{joint} L1 speed {l1:.4} within 30% of 0.030"), (l1 - 0.030).abs() <= 0.3 * 0.030);
                c.check(format!("{joint} L4 speed {l4:.4} within 30% of 0.165"), (l4 - 0.165).abs() <= 0.3 * 0.165);
                let rows: Vec<Vec<f64>> = (0..13).map(|s| LevelId::ALL.iter().map(|&l| value(s, l, joint, 0)).collect()).collect();
                let p = rm_anova(&RepeatedMeasures::from_rows(&rows).unwrap()).unwrap().p;
                c.check(format!("{joint} speed RM-ANOVA p = {p:.1e} < .001"), p < 0.001);
                let mut rng = ChaCha8Rng::seed_from_u64(70);
                let f_obs = oracle_f(&rows);
                let mut perm = rows.clone();
                let draws = 10_000;
                let hits = (0..draws)
                    .filter(|_| {
                        for r in perm.iter_mut() {
                            r.shuffle(&mut rng);
                        }
                        oracle_f(&perm) >= f_obs
                    })
                    .count();
                c.check(format!("{joint} permutation p {hits}/{draws} < .001"), (hits as f64 / draws as f64) < 0.001);
            }
        }
    }
    c.finish();
}

fn session_artifacts(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let b = MovementBoundary::synthetic_default();
    let plan = SessionPlan::default();
    let (stream, scripts) = generate_session(&PatientProfile::perfect(8), &plan, &b, 8).unwrap();
    let mut events = Vec::new();
    for (s, start) in scripts.iter().zip(plan.level_starts()) {
        events.extend(replay(s, &stream.samples, EngineConfig::default(), start).unwrap());
    }
    mobility_kit::csvio::write_events(&dir.join("events.jsonl"), &events).unwrap();
    let seg: LevelSegmentation = plan.segmentation();
    let inputs = ReportInputs {
        samples: &stream.samples,
        segmentation: &seg,
        plan: &plan,
        boundary: &b,
        seed: 8,
        engine: EngineConfig::default(),
        metrics: MetricsConfig::default(),
        reference: None,
        ape: ApeOptions::default(),
        physio: None,
        config_hash: "0".repeat(64),
        session_id: Some("acceptance".into()),
    };
    report::write_report(dir, &report::build_report(&inputs).unwrap()).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = ["events.jsonl", "report.md", "report.json", "plots/speed.csv", "plots/completion.csv"]
        .iter()
        .map(|f| (f.to_string(), std::fs::read(dir.join(f)).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_8_perfect_play_and_determinism() {
    let mut c = Criterion::new(8, "perfect play and determinism", 10.0);
    let b = MovementBoundary::synthetic_default();
    let plan = SessionPlan::default();
    let (stream, scripts) = generate_session(&PatientProfile::perfect(8), &plan, &b, 8).unwrap();
    for (s, start) in scripts.iter().zip(plan.level_starts()) {
        let ev = replay(s, &stream.samples, EngineConfig::default(), start).unwrap();
        let done = summarize(&ev, s);
        c.check(format!("{} completion {}/{}", s.level.id, done.targets_hit, done.targets_total), done.completion_fraction == 1.0);
        let ms: Vec<EventKind> = ev
            .iter()
            .map(|e| e.kind)
            .filter(|k| matches!(k, EventKind::Milestone25 | EventKind::Milestone50 | EventKind::Milestone75))
            .collect();
        c.check(format!("{} milestones {ms:?}", s.level.id), ms == [EventKind::Milestone25, EventKind::Milestone50, EventKind::Milestone75]);
    }
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (a, z) = (session_artifacts(d1.path()), session_artifacts(d2.path()));
    c.check("two runs give byte-identical events and reports", a == z && !a.is_empty());
    c.finish();
}
