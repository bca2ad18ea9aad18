use alloc::format;

use super::GameError;
use crate::math::Vec3;
use crate::session::{JointId, PoseSample};

/// Smallest vertical or lateral span that still gives a playable volume.
pub const MIN_RANGE_M: f64 = 0.05;

/// Patient-specific playable box. Targets live on the plane `z = forward_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MovementBoundary {
    pub rest_y: f64,
    pub overhead_y: f64,
    pub lateral_left_x: f64,
    pub lateral_right_x: f64,
    pub forward_z: f64,
}

impl MovementBoundary {
    pub fn validate(&self) -> Result<(), GameError> {
        let all = [
            self.rest_y,
            self.overhead_y,
            self.lateral_left_x,
            self.lateral_right_x,
            self.forward_z,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GameError::InvalidBoundary("non-finite value".into()));
        }
        if self.overhead_y <= self.rest_y {
            return Err(GameError::InvalidBoundary(format!(
                "overhead_y {} must exceed rest_y {}",
                self.overhead_y, self.rest_y
            )));
        }
        if self.lateral_right_x <= self.lateral_left_x {
            return Err(GameError::InvalidBoundary(format!(
                "lateral_right_x {} must exceed lateral_left_x {}",
                self.lateral_right_x, self.lateral_left_x
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.lateral_right_x - self.lateral_left_x
    }

    pub fn height(&self) -> f64 {
        self.overhead_y - self.rest_y
    }

    pub fn center_x(&self) -> f64 {
        0.5 * (self.lateral_left_x + self.lateral_right_x)
    }

    pub fn center(&self) -> Vec3 {
        Vec3::new(self.center_x(), 0.5 * (self.rest_y + self.overhead_y), self.forward_z)
    }

    /// Point on the play plane from fractions of the box (0 = left/rest, 1 = right/overhead).
    pub fn at(&self, fx: f64, fy: f64) -> Vec3 {
        Vec3::new(
            self.lateral_left_x + fx * self.width(),
            self.rest_y + fy * self.height(),
            self.forward_z,
        )
    }

    /// Membership in the box with a small absolute slack.
    pub fn contains(&self, p: Vec3, slack: f64) -> bool {
        p.x >= self.lateral_left_x - slack
            && p.x <= self.lateral_right_x + slack
            && p.y >= self.rest_y - slack
            && p.y <= self.overhead_y + slack
            && (p.z - self.forward_z).abs() <= slack
    }

    /// Seated healthy adult, headset at the origin, facing -Z.
    pub fn synthetic_default() -> Self {
        MovementBoundary {
            rest_y: -0.50,
            overhead_y: 0.10,
            lateral_left_x: -0.25,
            lateral_right_x: 0.25,
            forward_z: -0.30,
        }
    }
}

fn hands(sample: &PoseSample) -> Result<(Vec3, Vec3), GameError> {
    let l = sample.get(&JointId::LeftHand).ok_or(GameError::MissingJoint("LH"))?;
    let r = sample.get(&JointId::RightHand).ok_or(GameError::MissingJoint("RH"))?;
    Ok((l, r))
}

/// Three-pose boundary calibration: hands resting on the lap, raised as high
/// as possible, then extended laterally.
pub fn calibrate(
    rest: &PoseSample,
    overhead: &PoseSample,
    lateral: &PoseSample,
) -> Result<MovementBoundary, GameError> {
    let (rl, rr) = hands(rest)?;
    let (ol, or) = hands(overhead)?;
    let (ll, lr) = hands(lateral)?;

    let rest_y = 0.5 * (rl.y + rr.y);
    let overhead_y = ol.y.max(or.y);
    let lateral_left_x = ll.x.min(lr.x);
    let lateral_right_x = ll.x.max(lr.x);
    let forward_z = (rl.z + rr.z + ol.z + or.z + ll.z + lr.z) / 6.0;

    let b = MovementBoundary { rest_y, overhead_y, lateral_left_x, lateral_right_x, forward_z };
    if [rest_y, overhead_y, lateral_left_x, lateral_right_x, forward_z]
        .iter()
        .any(|v| !v.is_finite())
    {
        return Err(GameError::InvalidBoundary("non-finite calibration pose".into()));
    }
    if b.height() < MIN_RANGE_M {
        return Err(GameError::InsufficientRange(format!(
            "vertical span {:.3} m below {MIN_RANGE_M} m",
            b.height()
        )));
    }
    if b.width() < MIN_RANGE_M {
        return Err(GameError::InsufficientRange(format!(
            "lateral span {:.3} m below {MIN_RANGE_M} m",
            b.width()
        )));
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pose(l: Vec3, r: Vec3) -> PoseSample {
        PoseSample::new(0.0).with(JointId::LeftHand, l).with(JointId::RightHand, r)
    }

    #[test]
    fn symmetric_calibration() {
        let rest = pose(Vec3::new(-0.2, 0.0, -0.3), Vec3::new(0.2, 0.0, -0.3));
        let up = pose(Vec3::new(-0.1, 0.6, -0.3), Vec3::new(0.1, 0.6, -0.3));
        let side = pose(Vec3::new(-0.5, 0.3, -0.3), Vec3::new(0.5, 0.3, -0.3));
        let b = calibrate(&rest, &up, &side).unwrap();
        assert_eq!(
            (b.rest_y, b.overhead_y, b.lateral_left_x, b.lateral_right_x),
            (0.0, 0.6, -0.5, 0.5)
        );
        assert!((b.forward_z + 0.3).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_lateral() {
        let rest = pose(Vec3::new(-0.2, 0.0, 0.0), Vec3::new(0.2, 0.0, 0.0));
        let up = pose(Vec3::new(-0.1, 0.6, 0.0), Vec3::new(0.1, 0.6, 0.0));
        let side = pose(Vec3::new(-0.3, 0.3, 0.0), Vec3::new(0.5, 0.3, 0.0));
        let b = calibrate(&rest, &up, &side).unwrap();
        assert_eq!((b.lateral_left_x, b.lateral_right_x), (-0.3, 0.5));
    }

    #[test]
    fn identical_poses_rejected() {
        let p = pose(Vec3::new(-0.2, 0.0, 0.0), Vec3::new(0.2, 0.0, 0.0));
        // lateral span is 0.4 here but the vertical span is zero
        assert!(matches!(calibrate(&p, &p, &p), Err(GameError::InsufficientRange(_))));
        let q = pose(Vec3::ZERO, Vec3::ZERO);
        assert!(matches!(calibrate(&q, &q, &q), Err(GameError::InsufficientRange(_))));
    }

    #[test]
    fn missing_hand() {
        let p = PoseSample::new(0.0).with(JointId::LeftHand, Vec3::ZERO);
        assert_eq!(calibrate(&p, &p, &p), Err(GameError::MissingJoint("RH")));
    }
}
