use std::fmt::Write as _;

use serde::Serialize;

use super::{closed_form, recursive_leg_dynamics, DynamicsError, ExternalLoad, LegJointLoads};
use crate::kinematics::{LegKinematics, SegmentState};
use crate::model::LegParams;
use crate::types::{Joint, Side, Vec3};

/// Relative tolerance above which the closed forms and the recursive pass are
/// reported as diverging.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-9;

/// Kinetic inputs of one segment at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentFrame {
    /// Unit vector, proximal to distal joint.
    pub e: Vec3,
    /// COM acceleration.
    pub acc: Vec3,
    /// Angular acceleration about +Y.
    pub omega_dot: f64,
}

impl From<&SegmentState> for SegmentFrame {
    fn from(s: &SegmentState) -> Self {
        SegmentFrame {
            e: s.e,
            acc: s.com_acc,
            omega_dot: s.omega_dot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegFrame {
    pub foot: SegmentFrame,
    pub shank: SegmentFrame,
    pub thigh: SegmentFrame,
}

/// Result of one frame: recursive loads plus the closed-form cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameDynamics {
    pub loads: LegJointLoads,
    pub closed_ankle: Vec3,
    pub closed_knee: Vec3,
    pub closed_hip_printed: Vec3,
    pub thigh_mass_term: Vec3,
}

impl FrameDynamics {
    /// Relative disagreement of the sagittal components, per joint. The hip
    /// comparison accounts for the thigh-mass term.
    pub fn divergence(&self) -> [(Joint, f64, f64, f64); 3] {
        let hip_closed = self.closed_hip_printed.y - self.thigh_mass_term.y;
        [
            (Joint::Ankle, self.loads.ankle.moment.y, self.closed_ankle.y, 0.0),
            (Joint::Knee, self.loads.knee.moment.y, self.closed_knee.y, 0.0),
            (Joint::Hip, self.loads.hip.moment.y, hip_closed, 0.0),
        ]
        .map(|(j, a, b, _)| (j, a, b, relative_difference(a, b)))
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Inverse dynamics of one leg at one instant. The recursive pass is
/// authoritative; the closed forms are evaluated alongside for comparison.
pub fn leg_inverse_dynamics(load: &ExternalLoad, frame: &LegFrame, params: &LegParams, g: f64) -> FrameDynamics {
    FrameDynamics {
        loads: recursive_leg_dynamics(load, frame, params, g),
        closed_ankle: closed_form::ankle_moment(load, &frame.foot, &params.foot, g),
        closed_knee: closed_form::knee_moment(load, frame, params, g),
        closed_hip_printed: closed_form::hip_moment_printed(load, frame, params, g),
        thigh_mass_term: closed_form::thigh_mass_term(frame, params, g),
    }
}

/// Frame where the two formulations disagree beyond [`DIVERGENCE_TOLERANCE`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Divergence {
    pub time: f64,
    pub joint: Joint,
    pub recursive: f64,
    pub closed_form: f64,
}

/// Sagittal joint moments of one side.
///
/// Signs follow the usual clinical convention for internal moments: ankle
/// plantarflexion, knee extension and hip extension are positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointMomentSeries {
    pub side: Side,
    pub body_mass: f64,
    pub times: Vec<f64>,
    /// N m
    pub ankle: Vec<f64>,
    pub knee: Vec<f64>,
    pub hip: Vec<f64>,
    /// Joint reaction forces (proximal segment on distal subsystem), N.
    pub ankle_force: Vec<Vec3>,
    pub knee_force: Vec<Vec3>,
    pub hip_force: Vec<Vec3>,
    pub divergences: Vec<Divergence>,
}

impl JointMomentSeries {
    pub fn joint(&self, joint: Joint) -> &[f64] {
        match joint {
            Joint::Ankle => &self.ankle,
            Joint::Knee => &self.knee,
            Joint::Hip => &self.hip,
        }
    }

    /// Mass-normalized moment (N m / kg).
    pub fn normalized(&self, joint: Joint) -> Vec<f64> {
        self.joint(joint).iter().map(|m| m / self.body_mass).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Convert lab-frame joint moments (Y components) to clinical signs.
pub fn clinical_moments(loads: &LegJointLoads) -> (f64, f64, f64) {
    (loads.ankle.moment.y, -loads.knee.moment.y, loads.hip.moment.y)
}

/// Moments for every frame of a leg given one external load per frame.
pub fn leg_moment_series(
    leg: &LegKinematics,
    loads: &[(f64, ExternalLoad)],
    params: &LegParams,
    g: f64,
    body_mass: f64,
) -> Result<JointMomentSeries, DynamicsError> {
    if loads.len() != leg.len() {
        return Err(DynamicsError::Contract(format!(
            "{} leg has {} frames but {} loads",
            leg.side,
            leg.len(),
            loads.len()
        )));
    }
    if !(body_mass > 0.0) {
        return Err(DynamicsError::Contract(format!("body mass must be positive, got {body_mass}")));
    }
    let n = leg.len();
    let mut out = JointMomentSeries {
        side: leg.side,
        body_mass,
        times: leg.times.clone(),
        ankle: Vec::with_capacity(n),
        knee: Vec::with_capacity(n),
        hip: Vec::with_capacity(n),
        ankle_force: Vec::with_capacity(n),
        knee_force: Vec::with_capacity(n),
        hip_force: Vec::with_capacity(n),
        divergences: Vec::new(),
    };
    let tol = 1e-9 * leg.times.get(1).map_or(1.0, |t| t - leg.times[0]).abs().max(1e-12);
    for i in 0..n {
        let t = leg.times[i];
        let (lt, load) = &loads[i];
        let states = [&leg.foot[i], &leg.shank[i], &leg.thigh[i]];
        if (lt - t).abs() > tol || states.iter().any(|s| (s.time - t).abs() > tol) {
            return Err(DynamicsError::Contract(format!(
                "timestamp mismatch at frame {i}: kinematics t={t}, load t={lt}"
            )));
        }
        let frame = LegFrame {
            foot: states[0].into(),
            shank: states[1].into(),
            thigh: states[2].into(),
        };
        let fd = leg_inverse_dynamics(load, &frame, params, g);
        let (a, k, h) = clinical_moments(&fd.loads);
        for (joint, rec, closed, rel) in fd.divergence() {
            if rel > DIVERGENCE_TOLERANCE && (rec - closed).abs() > 1e-9 {
                out.divergences.push(Divergence {
                    time: t,
                    joint,
                    recursive: rec,
                    closed_form: closed,
                });
            }
        }
        out.ankle.push(a);
        out.knee.push(k);
        out.hip.push(h);
        out.ankle_force.push(fd.loads.ankle.force);
        out.knee_force.push(fd.loads.knee.force);
        out.hip_force.push(fd.loads.hip.force);
    }
    if !out.divergences.is_empty() {
        log::warn!(
            "{} leg: closed forms and recursive pass diverge on {} frame-joints",
            leg.side,
            out.divergences.len()
        );
    }
    Ok(out)
}

/// Per-frame moment table `time,side,ankle_nm,knee_nm,hip_nm,ankle_nmkg,knee_nmkg,hip_nmkg`,
/// keeping the rows for which `keep(side, frame)` holds.
pub fn write_moment_table<'a>(
    series: impl IntoIterator<Item = &'a JointMomentSeries>,
    keep: impl Fn(Side, usize) -> bool,
) -> String {
    let mut out = String::from("time,side,ankle_nm,knee_nm,hip_nm,ankle_nmkg,knee_nmkg,hip_nmkg\n");
    for s in series {
        let m = s.body_mass;
        for i in (0..s.len()).filter(|&i| keep(s.side, i)) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.times[i],
                s.side,
                s.ankle[i],
                s.knee[i],
                s.hip[i],
                s.ankle[i] / m,
                s.knee[i] / m,
                s.hip[i] / m
            );
        }
    }
    out
}
