use serde::Serialize;

use super::LegKinematics;
use crate::types::{Side, Vec3};

/// Sagittal joint angles of one side, in degrees.
///
/// Hip: thigh pitch from the downward vertical, flexion positive. Knee: thigh
/// pitch minus shank pitch, flexion positive, 0 at full extension. Ankle: foot
/// pitch minus shank pitch minus 90, dorsiflexion positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointAngleSeries {
    pub side: Side,
    pub times: Vec<f64>,
    pub hip: Vec<f64>,
    pub knee: Vec<f64>,
    pub ankle: Vec<f64>,
}

/// Forward pitch of a segment direction from straight down (rad): positive
/// when the distal end is ahead of the proximal end.
pub fn pitch(e: &Vec3) -> f64 {
    e.x.atan2(-e.z)
}

/// Wrap an angle in degrees into (-180, 180].
pub fn wrap_deg(a: f64) -> f64 {
    let w = a - 360.0 * ((a + 180.0) / 360.0).floor();
    if w == -180.0 {
        180.0
    } else {
        w
    }
}

pub fn hip_angle(thigh: &Vec3) -> f64 {
    wrap_deg(pitch(thigh).to_degrees())
}

pub fn knee_angle(thigh: &Vec3, shank: &Vec3) -> f64 {
    wrap_deg((pitch(thigh) - pitch(shank)).to_degrees())
}

pub fn ankle_angle(shank: &Vec3, foot: &Vec3) -> f64 {
    wrap_deg((pitch(foot) - pitch(shank)).to_degrees() - 90.0)
}

pub fn joint_angles(leg: &LegKinematics) -> JointAngleSeries {
    let n = leg.len();
    let mut out = JointAngleSeries {
        side: leg.side,
        times: leg.times.clone(),
        hip: Vec::with_capacity(n),
        knee: Vec::with_capacity(n),
        ankle: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (t, s, f) = (&leg.thigh[i].e, &leg.shank[i].e, &leg.foot[i].e);
        out.hip.push(hip_angle(t));
        out.knee.push(knee_angle(t, s));
        out.ankle.push(ankle_angle(s, f));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dir(deg_from_down: f64) -> Vec3 {
        let a = deg_from_down.to_radians();
        Vec3::new(a.sin(), 0.0, -a.cos())
    }

    #[test]
    fn reference_postures() {
        let down = Vec3::new(0.0, 0.0, -1.0);
        let fwd = Vec3::new(1.0, 0.0, 0.0);
        assert!(knee_angle(&dir(20.0), &dir(20.0)).abs() < 1e-12);
        assert!(ankle_angle(&down, &fwd).abs() < 1e-12);
        assert!((hip_angle(&dir(30.0)) - 30.0).abs() < 1e-12);
        assert!((knee_angle(&dir(10.0), &dir(-50.0)) - 60.0).abs() < 1e-12);
    }

    #[test]
    fn shank_inclined_foot_flat_is_plantarflexion() {
        // Knee 10 deg behind the ankle, foot horizontal.
        let a = ankle_angle(&dir(10.0), &Vec3::new(1.0, 0.0, 0.0));
        assert!((a + 10.0).abs() < 1e-12, "{a}");
        // Toes raised 15 deg with a vertical shank.
        let up = 15f64.to_radians();
        let a = ankle_angle(&dir(0.0), &Vec3::new(up.cos(), 0.0, up.sin()));
        assert!((a - 15.0).abs() < 1e-12);
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_deg(190.0), -170.0);
        assert_eq!(wrap_deg(-180.0), 180.0);
        assert_eq!(wrap_deg(540.0), 180.0);
        assert!((wrap_deg(-190.0) - 170.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn relative_angles_rotation_invariant(t in -60.0f64..60.0, s in -60.0f64..60.0, f in 40.0f64..140.0, rot in -90.0f64..90.0) {
            let k0 = knee_angle(&dir(t), &dir(s));
            let a0 = ankle_angle(&dir(s), &dir(f));
            let k1 = knee_angle(&dir(t + rot), &dir(s + rot));
            let a1 = ankle_angle(&dir(s + rot), &dir(f + rot));
            prop_assert!((k0 - k1).abs() < 1e-9);
            prop_assert!((a0 - a1).abs() < 1e-9);
        }
    }
}
