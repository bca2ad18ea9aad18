//! Tracking accuracy against a reference capture: time association, optional
//! frame registration and absolute pose error (APE) statistics.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{Matrix3, Vector3, SVD};
use thiserror::Error;

use crate::math::{abs, centroid, sqrt, Vec3};
use crate::session::{JointId, JointTrajectory};

/// Half a 50 Hz frame.
pub const DEFAULT_ASSOC_TOL_S: f64 = 0.010;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackingError {
    #[error("no temporal overlap within {tol} s")]
    NoTemporalOverlap { tol: f64 },
    #[error("association tolerance must be positive")]
    BadTolerance,
    #[error("rank deficient: {0}")]
    RankDeficient(&'static str),
    #[error("no matches")]
    NoMatches,
    #[error("unknown registration mode {0:?}")]
    UnknownMode(String),
}

/// Estimated and reference trajectories of one joint with their time matches.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPair {
    pub estimated: JointTrajectory,
    pub reference: JointTrajectory,
    /// (estimated index, reference index), strictly increasing in both.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_estimated: usize,
    pub unmatched_reference: usize,
}

impl TrajectoryPair {
    pub fn matched_points(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        self.matches
            .iter()
            .map(|&(i, j)| (self.estimated.samples[i].p, self.reference.samples[j].p))
    }
}

/// Matches each estimated sample to its nearest unused reference sample
/// within `tol`, walking both streams forward so matches stay time-ordered.
pub fn associate(
    est: &JointTrajectory,
    reference: &JointTrajectory,
    tol: f64,
) -> Result<TrajectoryPair, TrackingError> {
    if !(tol > 0.0) {
        return Err(TrackingError::BadTolerance);
    }
    let r = &reference.samples;
    let mut matches = Vec::new();
    let mut lo = 0usize;
    for (i, e) in est.samples.iter().enumerate() {
        while lo < r.len() && r[lo].t < e.t - tol {
            lo += 1;
        }
        let mut best: Option<(f64, usize)> = None;
        let mut j = lo;
        while j < r.len() && r[j].t <= e.t + tol {
            let d = abs(r[j].t - e.t);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, j));
            }
            j += 1;
        }
        if let Some((_, j)) = best {
            matches.push((i, j));
            lo = j + 1;
        }
    }
    if matches.is_empty() {
        return Err(TrackingError::NoTemporalOverlap { tol });
    }
    Ok(TrajectoryPair {
        unmatched_estimated: est.len() - matches.len(),
        unmatched_reference: reference.len() - matches.len(),
        estimated: est.clone(),
        reference: reference.clone(),
        matches,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RegistrationMode {
    #[default]
    None,
    Translation,
    Rigid,
}

impl fmt::Display for RegistrationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegistrationMode::None => "none",
            RegistrationMode::Translation => "translation",
            RegistrationMode::Rigid => "rigid",
        })
    }
}

impl FromStr for RegistrationMode {
    type Err = TrackingError;
    fn from_str(s: &str) -> Result<Self, TrackingError> {
        match s {
            "none" => Ok(RegistrationMode::None),
            "translation" => Ok(RegistrationMode::Translation),
            "rigid" => Ok(RegistrationMode::Rigid),
            other => Err(TrackingError::UnknownMode(other.into())),
        }
    }
}

/// `x -> R x + t` with `R` a proper rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    /// Row-major rotation.
    pub rotation: [[f64; 3]; 3],
    pub translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: Vec3::ZERO,
        }
    }

    pub fn translation(t: Vec3) -> Self {
        RigidTransform { translation: t, ..Self::identity() }
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        crate::math::rotate(&self.rotation, p) + self.translation
    }

    fn to_matrix(self) -> Matrix3<f64> {
        let r = self.rotation;
        Matrix3::new(r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2])
    }

    /// Largest entry of `R R^T - I`.
    pub fn orthonormality_error(&self) -> f64 {
        let m = self.to_matrix();
        (m * m.transpose() - Matrix3::identity()).abs().max()
    }

    pub fn determinant(&self) -> f64 {
        self.to_matrix().determinant()
    }
}

fn to_na(v: Vec3) -> Vector3<f64> {
    Vector3::new(v.x, v.y, v.z)
}

/// Least-squares transform taking the estimate onto the reference.
///
/// `Rigid` is the closed-form SVD solution with the reflection fix.
pub fn register(pair: &TrajectoryPair, mode: RegistrationMode) -> Result<RigidTransform, TrackingError> {
    let (est, reference): (Vec<Vec3>, Vec<Vec3>) = pair.matched_points().unzip();
    if est.is_empty() {
        return Err(TrackingError::NoMatches);
    }
    let ce = centroid(&est).unwrap_or(Vec3::ZERO);
    let cr = centroid(&reference).unwrap_or(Vec3::ZERO);
    match mode {
        RegistrationMode::None => Ok(RigidTransform::identity()),
        RegistrationMode::Translation => Ok(RigidTransform::translation(cr - ce)),
        RegistrationMode::Rigid => {
            if est.len() < 3 {
                return Err(TrackingError::RankDeficient("fewer than 3 matched points"));
            }
            let mut cov = Matrix3::zeros();
            let mut spread = Matrix3::zeros();
            for (&e, &r) in est.iter().zip(&reference) {
                let de = to_na(e - ce);
                cov += de * to_na(r - cr).transpose();
                spread += de * de.transpose();
            }
            let s = SVD::new(spread, false, false).singular_values;
            let scale = s[0].max(f64::MIN_POSITIVE);
            if s[1] <= 1e-12 * scale || s[0] <= 0.0 {
                return Err(TrackingError::RankDeficient("matched points are collinear"));
            }
            let svd = SVD::new(cov, true, true);
            let (u, v_t) = match (svd.u, svd.v_t) {
                (Some(u), Some(v_t)) => (u, v_t),
                _ => return Err(TrackingError::RankDeficient("SVD failed")),
            };
            let v = v_t.transpose();
            let d = if (v * u.transpose()).determinant() < 0.0 { -1.0 } else { 1.0 };
            let r = v * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * u.transpose();
            let t = to_na(cr) - r * to_na(ce);
            let mut rotation = [[0.0; 3]; 3];
            for (i, row) in rotation.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    *x = r[(i, j)];
                }
            }
            Ok(RigidTransform { rotation, translation: Vec3::new(t.x, t.y, t.z) })
        }
    }
}

/// APE summary of one (joint, task) cell. `sd` is the population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingErrorStats {
    pub joint: JointId,
    pub task: String,
    pub mean: f64,
    pub sd: f64,
    pub rmse: f64,
    pub max: f64,
    pub n: usize,
}

/// Per-match Euclidean error `|T(est_i) - ref_i|` and its summary.
pub fn ape(pair: &TrajectoryPair, transform: &RigidTransform) -> Result<TrackingErrorStats, TrackingError> {
    ape_labeled(pair, transform, "")
}

pub fn ape_labeled(
    pair: &TrajectoryPair,
    transform: &RigidTransform,
    task: &str,
) -> Result<TrackingErrorStats, TrackingError> {
    let errors: Vec<f64> = pair.matched_points().map(|(e, r)| transform.apply(e).distance(r)).collect();
    if errors.is_empty() {
        return Err(TrackingError::NoMatches);
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    let rmse = sqrt(errors.iter().map(|e| e * e).sum::<f64>() / n);
    let max = errors.iter().copied().fold(0.0, f64::max);
    Ok(TrackingErrorStats {
        joint: pair.estimated.joint.clone(),
        task: task.to_string(),
        mean,
        sd: sqrt(var),
        rmse,
        max,
        n: errors.len(),
    })
}

/// Input cell for [`ape_report`].
#[derive(Debug, Clone)]
pub struct TrackingCell {
    pub joint: JointId,
    pub task: String,
    pub estimated: Option<JointTrajectory>,
    pub reference: Option<JointTrajectory>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApeRow {
    pub joint: JointId,
    pub task: String,
    pub stats: Result<TrackingErrorStats, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApeOptions {
    pub mode: RegistrationMode,
    pub assoc_tol: f64,
}

impl Default for ApeOptions {
    fn default() -> Self {
        ApeOptions { mode: RegistrationMode::None, assoc_tol: DEFAULT_ASSOC_TOL_S }
    }
}

/// APE per (joint, task) cell; failing cells keep their reason.
pub fn ape_report(cells: &[TrackingCell], opts: ApeOptions) -> Vec<ApeRow> {
    cells
        .iter()
        .map(|c| {
            let stats = match (&c.estimated, &c.reference) {
                (Some(e), Some(r)) => associate(e, r, opts.assoc_tol)
                    .and_then(|pair| {
                        let t = register(&pair, opts.mode)?;
                        ape_labeled(&pair, &t, &c.task)
                    })
                    .map_err(|e| e.to_string()),
                _ => Err("no samples".to_string()),
            };
            ApeRow { joint: c.joint.clone(), task: c.task.clone(), stats }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::TimedPoint;

    fn traj(times: impl Iterator<Item = f64>, f: impl Fn(f64) -> Vec3) -> JointTrajectory {
        JointTrajectory::new(JointId::LeftHand, times.map(|t| TimedPoint { t, p: f(t) }).collect()).unwrap()
    }

    fn circle(t: f64) -> Vec3 {
        Vec3::new(libm::cos(t), libm::sin(2.0 * t), 0.3 * t)
    }

    #[test]
    fn identical_grids_match_everything() {
        let a = traj((0..100).map(|i| i as f64 * 0.02), circle);
        let pair = associate(&a, &a, DEFAULT_ASSOC_TOL_S).unwrap();
        assert_eq!(pair.matches.len(), 100);
        let s = ape(&pair, &RigidTransform::identity()).unwrap();
        assert_eq!((s.mean, s.sd, s.max), (0.0, 0.0, 0.0));
    }

    #[test]
    fn offset_clock_has_no_overlap() {
        let a = traj((0..100).map(|i| i as f64 * 0.02), circle);
        let b = traj((0..100).map(|i| i as f64 * 0.02 + 10.0), circle);
        assert!(matches!(associate(&a, &b, 0.01), Err(TrackingError::NoTemporalOverlap { .. })));
    }

    #[test]
    fn translation_recovered() {
        let a = traj((0..50).map(|i| i as f64 * 0.02), circle);
        let b = traj((0..50).map(|i| i as f64 * 0.02), |t| circle(t) + Vec3::new(0.03, 0.0, 0.0));
        let pair = associate(&a, &b, 0.01).unwrap();
        let t = register(&pair, RegistrationMode::Translation).unwrap();
        assert!(t.translation.distance(Vec3::new(0.03, 0.0, 0.0)) < 1e-12);
        let none = ape(&pair, &RigidTransform::identity()).unwrap();
        assert!((none.mean - 0.03).abs() < 1e-12 && none.sd < 1e-12);
    }

    #[test]
    fn collinear_points_are_rank_deficient() {
        let a = traj((0..50).map(|i| i as f64 * 0.02), |t| Vec3::new(t, 2.0 * t, 0.0));
        let pair = associate(&a, &a, 0.01).unwrap();
        assert!(matches!(register(&pair, RegistrationMode::Rigid), Err(TrackingError::RankDeficient(_))));
    }

    #[test]
    fn aligned_pair_registers_to_identity() {
        let a = traj((0..80).map(|i| i as f64 * 0.02), circle);
        let pair = associate(&a, &a, 0.01).unwrap();
        let t = register(&pair, RegistrationMode::Rigid).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((t.rotation[i][j] - want).abs() < 1e-9);
            }
        }
        assert!(t.translation.norm() < 1e-9);
    }
}
