//! Synthetic gait generator.
//!
//! Forward-generates marker trajectories, force-plate samples, ground-truth
//! joint moments and ground-truth events from a scripted profile. Every
//! trajectory is an explicit function of time evaluated with [`Jet`], so
//! velocities and accelerations are exact.
//!
//! Walking: each foot follows a heel rocker (rotation about the heel contact
//! point), a flat-foot phase, a toe rocker (rotation about the toe contact
//! point) and a swing phase blending the toe-off state into the next
//! heel-strike state. Hips ride on a pelvis that advances at the mean walking
//! speed with two vertical oscillations per stride; knees follow from
//! two-link inverse kinematics. The total ground reaction equals the rate of
//! change of momentum plus weight of all segments, shared between feet in
//! double support, with the centre of pressure rolling from heel to toe.
//!
//! Standing: a static posture with the thigh vertical and the shank tilted so
//! that the leg's weight produces no moment about the hip, with the centre of
//! pressure directly below the hip.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{closed_form, write_moment_table, DynamicsError, ExternalLoad, Jet, JointMomentSeries, LegFrame, SegmentFrame};
use crate::forces::CalibrationCurve;
use crate::gaitseg::{write_event_table, GaitEvents, SideEvents};
use crate::ingest::{write_atomic, write_grf, write_markers, GrfSample, MarkerSeries, TrialMeta};
use crate::model::{segment_parameters, AnthropometricTable, Constants, LegParams, Participant, SegmentLengths};
use crate::types::{Side, Terrain, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Walk,
    Stand,
}

/// Scripted trial description. Walking fields are ignored for standing profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitProfile {
    pub kind: ProfileKind,
    pub participant_id: String,
    pub height_m: f64,
    pub mass_kg: f64,
    pub terrain: Terrain,
    pub sand_depth_cm: Option<f64>,
    pub duration_s: f64,
    pub marker_rate_hz: f64,
    pub grf_rate_hz: f64,
    pub plate_origin_m: [f64; 3],
    /// Lateral distance between the feet (and between the hip joints).
    pub step_width_m: f64,

    pub stride_time_s: f64,
    pub stance_fraction: f64,
    pub stride_length_m: f64,
    /// Right heel strike that lands on the force plate.
    pub first_heel_strike_s: f64,
    /// Mean pelvis (hip joint) height.
    pub hip_height_m: f64,
    /// Horizontal distance of the heel contact ahead of the hip at heel strike.
    pub heel_ahead_m: f64,
    pub heel_strike_pitch_deg: f64,
    pub toe_off_pitch_deg: f64,
    /// End of the heel rocker, as a fraction of stance.
    pub heel_rocker_fraction: f64,
    /// Start of the toe rocker, as a fraction of stance.
    pub heel_off_fraction: f64,
    /// Peak extra height of the heel contact point during swing.
    pub clearance_m: f64,
    pub pelvis_bob_m: f64,
    pub pelvis_surge_m: f64,

    /// Standing: fraction of body weight on the right (instrumented) foot.
    pub load_share: f64,
}

impl Default for GaitProfile {
    fn default() -> Self {
        GaitProfile {
            kind: ProfileKind::Walk,
            participant_id: "SYN01".into(),
            height_m: 1.717,
            mass_kg: 74.5,
            terrain: Terrain::Solid,
            sand_depth_cm: None,
            duration_s: 3.0,
            marker_rate_hz: 100.0,
            grf_rate_hz: 1000.0,
            plate_origin_m: [0.0; 3],
            step_width_m: 0.12,
            stride_time_s: 1.2,
            stance_fraction: 0.6,
            stride_length_m: 1.27,
            first_heel_strike_s: 1.0,
            hip_height_m: 0.82,
            heel_ahead_m: 0.3,
            heel_strike_pitch_deg: 15.0,
            toe_off_pitch_deg: 25.0,
            heel_rocker_fraction: 0.15,
            heel_off_fraction: 0.6,
            clearance_m: 0.05,
            pelvis_bob_m: 0.02,
            pelvis_surge_m: 0.012,
            load_share: 1.0,
        }
    }
}

impl GaitProfile {
    pub fn standing() -> Self {
        GaitProfile {
            kind: ProfileKind::Stand,
            ..GaitProfile::default()
        }
    }

    pub fn parse(text: &str) -> Result<Self, DynamicsError> {
        toml::from_str(text).map_err(|e| DynamicsError::Generation(format!("profile: {e}")))
    }

    fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: String| Err(DynamicsError::Generation(m));
        let positive = [
            ("height_m", self.height_m),
            ("mass_kg", self.mass_kg),
            ("duration_s", self.duration_s),
            ("marker_rate_hz", self.marker_rate_hz),
            ("grf_rate_hz", self.grf_rate_hz),
            ("step_width_m", self.step_width_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        let ratio = self.grf_rate_hz / self.marker_rate_hz;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
            return bad("grf_rate_hz must be an integer multiple of marker_rate_hz".into());
        }
        match (self.terrain, self.sand_depth_cm) {
            (Terrain::Sand, None) => return bad("sand terrain needs sand_depth_cm".into()),
            (Terrain::Solid, Some(_)) => return bad("sand_depth_cm is only valid on sand".into()),
            _ => {}
        }
        if self.kind == ProfileKind::Stand {
            if !(0.0..=1.0).contains(&self.load_share) {
                return bad(format!("load_share must lie in [0, 1], got {}", self.load_share));
            }
            return Ok(());
        }
        for (name, v) in [
            ("stride_time_s", self.stride_time_s),
            ("stride_length_m", self.stride_length_m),
            ("hip_height_m", self.hip_height_m),
            ("heel_strike_pitch_deg", self.heel_strike_pitch_deg),
            ("toe_off_pitch_deg", self.toe_off_pitch_deg),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.stance_fraction > 0.5 && self.stance_fraction < 0.9) {
            return bad(format!(
                "stance_fraction must lie in (0.5, 0.9) for walking, got {}",
                self.stance_fraction
            ));
        }
        if !(0.0 < self.heel_rocker_fraction
            && self.heel_rocker_fraction < self.heel_off_fraction
            && self.heel_off_fraction < 1.0)
        {
            return bad("need 0 < heel_rocker_fraction < heel_off_fraction < 1".into());
        }
        if self.first_heel_strike_s < 0.0 || self.first_heel_strike_s + self.stride_time_s > self.duration_s {
            return bad("the instrumented stride must lie inside the trial".into());
        }
        Ok(())
    }
}

/// Foot and leg geometry scaled from body height.
#[derive(Debug, Clone, Copy)]
struct Geometry {
    thigh: f64,
    shank: f64,
    /// Heel contact to toe contact along the sole.
    toe_contact: f64,
    /// Ankle joint in the foot frame (origin at the heel contact, x along the sole, z up).
    ankle: (f64, f64),
    /// Height of the heel and toe markers above their contact points.
    marker_height: f64,
    /// Ankle to toe marker distance: the foot segment length.
    foot: f64,
}

impl Geometry {
    fn new(height: f64) -> Self {
        let sole = 0.152 * height;
        let toe_contact = 0.75 * sole;
        let ankle = (0.2 * sole, 0.039 * height);
        let marker_height = 0.025;
        let foot = ((toe_contact - ankle.0).powi(2) + (marker_height - ankle.1).powi(2)).sqrt();
        Geometry {
            thigh: 0.245 * height,
            shank: 0.246 * height,
            toe_contact,
            ankle,
            marker_height,
            foot,
        }
    }

    fn lengths(&self) -> SegmentLengths {
        SegmentLengths {
            foot: self.foot,
            shank: self.shank,
            thigh: self.thigh,
        }
    }
}

/// Quintic polynomial matching position, velocity and acceleration at both ends.
#[derive(Debug, Clone, Copy)]
struct Quintic {
    c: [f64; 6],
}

impl Quintic {
    fn new(start: (f64, f64, f64), end: (f64, f64, f64), span: f64) -> Self {
        let (p0, v0, a0) = start;
        let (p1, v1, a1) = end;
        let t = span;
        let e0 = p1 - (p0 + v0 * t + 0.5 * a0 * t * t);
        let e1 = v1 - (v0 + a0 * t);
        let e2 = a1 - a0;
        Quintic {
            c: [
                p0,
                v0,
                0.5 * a0,
                (10.0 * e0 - 4.0 * e1 * t + 0.5 * e2 * t * t) / t.powi(3),
                (-15.0 * e0 + 7.0 * e1 * t - e2 * t * t) / t.powi(4),
                (6.0 * e0 - 3.0 * e1 * t + 0.5 * e2 * t * t) / t.powi(5),
            ],
        }
    }

    fn eval(&self, tau: Jet) -> Jet {
        self.c.iter().rev().fold(Jet::constant(0.0), |acc, &c| acc * tau + c)
    }
}

fn triple(j: Jet) -> (f64, f64, f64) {
    (j.v, j.d1, j.d2)
}

/// 0 -> 1 with zero first and second derivatives at both ends.
fn smooth5(x: Jet) -> Jet {
    x * x * x * (x * (x * 6.0 - 15.0) + 10.0)
}

fn rotate(beta: Jet, q: (f64, f64)) -> (Jet, Jet) {
    let (s, c) = (beta.sin(), beta.cos());
    (c * q.0 - s * q.1, s * q.0 + c * q.1)
}

#[derive(Debug, Clone, Copy)]
struct FootPose {
    /// Heel contact point (x, z).
    heel: (Jet, Jet),
    /// Pitch, positive toes up.
    beta: Jet,
    /// Stance index and time since heel strike when the foot is loaded.
    stance: Option<(i64, f64)>,
}

impl FootPose {
    fn point(&self, q: (f64, f64)) -> (Jet, Jet) {
        let (dx, dz) = rotate(self.beta, q);
        (self.heel.0 + dx, self.heel.1 + dz)
    }
}

#[derive(Debug, Clone, Copy)]
struct LegPose {
    hip: (Jet, Jet),
    knee: (Jet, Jet),
    ankle: (Jet, Jet),
    heel_marker: (Jet, Jet),
    toe_marker: (Jet, Jet),
}

/// Segment kinetic inputs from proximal and distal joint trajectories.
fn segment_frame(p: (Jet, Jet), d: (Jet, Jet), com_offset: f64) -> (SegmentFrame, Vec3) {
    let (dx, dz) = (d.0 - p.0, d.1 - p.1);
    let len = (dx * dx + dz * dz).sqrt();
    let (ex, ez) = (dx / len, dz / len);
    let (cx, cz) = (p.0 + ex * com_offset, p.1 + ez * com_offset);
    let theta = Jet::atan2(ex, ez);
    (
        SegmentFrame {
            e: Vec3::new(ex.v, 0.0, ez.v),
            acc: Vec3::new(cx.d2, 0.0, cz.d2),
            omega_dot: theta.d2,
        },
        Vec3::new(cx.v, 0.0, cz.v),
    )
}

trait Scene {
    fn side_y(&self, side: Side) -> f64;
    fn leg(&self, side: Side, t: f64) -> Result<(LegPose, Option<(i64, f64)>), DynamicsError>;
    fn pelvis(&self, t: f64) -> (Jet, Jet, Jet);
    /// Loads on both feet at `t`.
    fn loads(&self, t: f64) -> Result<[(Side, ExternalLoad, Option<(i64, f64)>); 2], DynamicsError>;
}

struct Walker {
    p: GaitProfile,
    geo: Geometry,
    params: LegParams,
    hat_mass: f64,
    g: f64,
    speed: f64,
    stance: f64,
    heel_rocker: f64,
    heel_off: f64,
    beta0: f64,
    beta1: f64,
}

impl Walker {
    fn new(p: &GaitProfile, geo: Geometry, params: LegParams, g: f64) -> Self {
        let stance = p.stance_fraction * p.stride_time_s;
        let heel_rocker = p.heel_rocker_fraction * stance;
        let heel_off = p.heel_off_fraction * stance;
        let beta0 = p.heel_strike_pitch_deg.to_radians();
        let beta1 = p.toe_off_pitch_deg.to_radians();
        Walker {
            p: p.clone(),
            geo,
            params,
            hat_mass: p.mass_kg - 2.0 * params.total_mass(),
            g,
            speed: p.stride_length_m / p.stride_time_s,
            stance,
            heel_rocker,
            heel_off,
            beta0,
            beta1,
        }
    }

    fn first_hs(&self, side: Side) -> f64 {
        match side {
            Side::Right => self.p.first_heel_strike_s,
            Side::Left => self.p.first_heel_strike_s + 0.5 * self.p.stride_time_s,
        }
    }

    fn hs_time(&self, side: Side, k: i64) -> f64 {
        self.first_hs(side) + k as f64 * self.p.stride_time_s
    }

    fn heel_x(&self, side: Side, k: i64) -> f64 {
        self.pelvis_x(Jet::constant(self.hs_time(side, k))).v + self.p.heel_ahead_m
    }

    fn pelvis_x(&self, t: Jet) -> Jet {
        let w = 4.0 * PI / self.p.stride_time_s;
        t * self.speed + ((t - self.p.first_heel_strike_s) * w).sin() * self.p.pelvis_surge_m
    }

    fn stance_pose(&self, side: Side, k: i64, u: Jet) -> FootPose {
        let x = self.heel_x(side, k);
        let fixed = (Jet::constant(x), Jet::constant(0.0));
        if u.v < self.heel_rocker {
            let q = Quintic::new((self.beta0, 0.0, 0.0), (0.0, 0.0, 0.0), self.heel_rocker);
            FootPose {
                heel: fixed,
                beta: q.eval(u),
                stance: Some((k, u.v)),
            }
        } else if u.v < self.heel_off {
            FootPose {
                heel: fixed,
                beta: Jet::constant(0.0),
                stance: Some((k, u.v)),
            }
        } else {
            let q = Quintic::new(
                (0.0, 0.0, 0.0),
                (-self.beta1, 0.0, 0.0),
                self.stance - self.heel_off,
            );
            let beta = q.eval(u - self.heel_off);
            let (dx, dz) = rotate(beta, (self.geo.toe_contact, 0.0));
            FootPose {
                heel: (-dx + x + self.geo.toe_contact, -dz),
                beta,
                stance: Some((k, u.v)),
            }
        }
    }

    fn foot_pose(&self, side: Side, t: Jet) -> FootPose {
        let period = self.p.stride_time_s;
        let k = ((t.v - self.first_hs(side)) / period).floor() as i64;
        let u = t - self.hs_time(side, k);
        if u.v < self.stance {
            return self.stance_pose(side, k, u);
        }
        // Swing is scripted on the toe contact point, which leaves the ground
        // at rest and lands where the next heel rocker expects it.
        let lc = self.geo.toe_contact;
        let start = self.stance_pose(side, k, Jet::variable(self.stance - 1e-12));
        let end = self.stance_pose(side, k + 1, Jet::variable(0.0));
        let (toe0, toe1) = (start.point((lc, 0.0)), end.point((lc, 0.0)));
        let span = period - self.stance;
        let tau = u - self.stance;
        let qx = Quintic::new(triple(toe0.0), triple(toe1.0), span);
        let qz = Quintic::new(triple(toe0.1), triple(toe1.1), span);
        let qb = Quintic::new(triple(start.beta), triple(end.beta), span);
        let v = tau / span;
        let bump = (v * (Jet::constant(1.0) - v)).powi(3) * (64.0 * self.p.clearance_m);
        let beta = qb.eval(tau);
        let (dx, dz) = rotate(beta, (lc, 0.0));
        FootPose {
            heel: (qx.eval(tau) - dx, qz.eval(tau) + bump - dz),
            beta,
            stance: None,
        }
    }
}

impl Scene for Walker {
    fn side_y(&self, side: Side) -> f64 {
        match side {
            Side::Right => -0.5 * self.p.step_width_m,
            Side::Left => 0.5 * self.p.step_width_m,
        }
    }

    fn pelvis(&self, t: f64) -> (Jet, Jet, Jet) {
        let t = Jet::variable(t);
        let w = 4.0 * PI / self.p.stride_time_s;
        let z = Jet::constant(self.p.hip_height_m) - ((t - self.p.first_heel_strike_s) * w).cos() * self.p.pelvis_bob_m;
        (self.pelvis_x(t), Jet::constant(0.0), z)
    }

    fn leg(&self, side: Side, t: f64) -> Result<(LegPose, Option<(i64, f64)>), DynamicsError> {
        let foot = self.foot_pose(side, Jet::variable(t));
        let (px, _, pz) = self.pelvis(t);
        let hip = (px, pz);
        let toe_contact = foot.point((self.geo.toe_contact, 0.0));
        if foot.stance.is_none() && (foot.heel.1.v < -1e-9 || toe_contact.1.v < -1e-9) {
            return Err(DynamicsError::Generation(format!(
                "{side} foot penetrates the ground during swing at t={t:.3} s"
            )));
        }
        let ankle = foot.point(self.geo.ankle);
        let (lt, ls) = (self.geo.thigh, self.geo.shank);
        let (dx, dz) = (ankle.0 - hip.0, ankle.1 - hip.1);
        let reach = (dx * dx + dz * dz).sqrt();
        if reach.v > 0.995 * (lt + ls) {
            return Err(DynamicsError::Generation(format!(
                "{side} leg over-extended at t={t:.3} s: hip-ankle distance {:.4} m, leg length {:.4} m",
                reach.v,
                lt + ls
            )));
        }
        if reach.v < (lt - ls).abs() + 0.05 {
            return Err(DynamicsError::Generation(format!("{side} leg folded at t={t:.3} s")));
        }
        let gamma = ((reach * reach + lt * lt - ls * ls) / (reach * (2.0 * lt))).acos();
        let (rx, rz) = (dx / reach, dz / reach);
        let (s, c) = (gamma.sin(), gamma.cos());
        let knee = (hip.0 + (c * rx - s * rz) * lt, hip.1 + (s * rx + c * rz) * lt);
        let m = self.geo.marker_height;
        let pose = LegPose {
            hip,
            knee,
            ankle,
            heel_marker: foot.point((0.0, m)),
            toe_marker: foot.point((self.geo.toe_contact, m)),
        };
        Ok((pose, foot.stance))
    }

    fn loads(&self, t: f64) -> Result<[(Side, ExternalLoad, Option<(i64, f64)>); 2], DynamicsError> {
        let mut total = Vec3::zeros();
        let gz = self.g * Vec3::z();
        let mut legs = Vec::with_capacity(2);
        for side in Side::BOTH {
            let (pose, stance) = self.leg(side, t)?;
            let frames = leg_frames(&pose, &self.params);
            for (f, mass) in [
                (frames.0.foot, self.params.foot.mass),
                (frames.0.shank, self.params.shank.mass),
                (frames.0.thigh, self.params.thigh.mass),
            ] {
                total += mass * (f.acc + gz);
            }
            legs.push((side, pose, stance));
        }
        let (_, _, pz) = self.pelvis(t);
        let (px, _, _) = self.pelvis(t);
        total += self.hat_mass * (Vec3::new(px.d2, 0.0, pz.d2) + gz);

        let shares = match (legs[0].2, legs[1].2) {
            (Some((kr, ur)), Some((kl, ul))) => {
                let (tr, tl) = (self.hs_time(Side::Right, kr), self.hs_time(Side::Left, kl));
                let (trail_start, lead_start) = if tr < tl { (tr, tl) } else { (tl, tr) };
                let end = trail_start + self.stance;
                let x = Jet::constant(((t - lead_start) / (end - lead_start)).clamp(0.0, 1.0));
                let trail = 1.0 - smooth5(x).v;
                let _ = (ur, ul);
                if tr < tl {
                    [trail, 1.0 - trail]
                } else {
                    [1.0 - trail, trail]
                }
            }
            (Some(_), None) => [1.0, 0.0],
            (None, Some(_)) => [0.0, 1.0],
            (None, None) => {
                return Err(DynamicsError::Generation(format!("flight phase at t={t:.3} s")));
            }
        };
        let mut out = [(Side::Right, ExternalLoad::swing(), None); 2];
        for (i, (side, pose, stance)) in legs.into_iter().enumerate() {
            let load = match stance {
                Some((k, u)) => {
                    let roll = smooth5(Jet::constant(u / self.stance)).v;
                    let cop = Vec3::new(self.heel_x(side, k) + self.geo.toe_contact * roll, self.side_y(side), 0.0);
                    let toe = Vec3::new(pose.toe_marker.0.v, self.side_y(side), pose.toe_marker.1.v);
                    ExternalLoad::new(shares[i] * total, Vec3::zeros(), cop, toe)
                }
                None => ExternalLoad::swing(),
            };
            out[i] = (side, load, stance);
        }
        Ok(out)
    }
}

fn leg_frames(pose: &LegPose, p: &LegParams) -> (LegFrame, [Vec3; 3]) {
    let (foot, cf) = segment_frame(pose.ankle, pose.toe_marker, p.foot.com_offset);
    let (shank, cs) = segment_frame(pose.knee, pose.ankle, p.shank.com_offset);
    let (thigh, ct) = segment_frame(pose.hip, pose.knee, p.thigh.com_offset);
    (LegFrame { foot, shank, thigh }, [cf, cs, ct])
}

struct Stander {
    params: LegParams,
    y: f64,
    hip: (f64, f64),
    knee: (f64, f64),
    ankle: (f64, f64),
    heel_marker: (f64, f64),
    toe_marker: (f64, f64),
    cop_x: f64,
    share: f64,
    weight: f64,
}

impl Stander {
    fn new(p: &GaitProfile, geo: Geometry, params: LegParams, g: f64) -> Result<Self, DynamicsError> {
        let m = geo.marker_height;
        let ankle = geo.ankle;
        let toe_marker = (geo.toe_contact, m);
        let foot_ex = (toe_marker.0 - ankle.0) / geo.foot;
        let (mf, ms) = (params.foot.mass, params.shank.mass);
        let sin_phi = -mf * params.foot.com_offset * foot_ex / (ms * params.shank.com_offset + mf * geo.shank);
        let cos_phi = (1.0 - sin_phi * sin_phi).sqrt();
        let knee = (ankle.0 - geo.shank * sin_phi, ankle.1 + geo.shank * cos_phi);
        let hip = (knee.0, knee.1 + geo.thigh);
        if !(0.0..=geo.toe_contact).contains(&hip.0) {
            return Err(DynamicsError::Generation("hip does not lie above the foot".into()));
        }
        Ok(Stander {
            params,
            y: 0.5 * p.step_width_m,
            hip,
            knee,
            ankle,
            heel_marker: (0.0, m),
            toe_marker,
            cop_x: hip.0,
            share: p.load_share,
            weight: p.mass_kg * g,
        })
    }

    fn pose(&self) -> LegPose {
        let j = |p: (f64, f64)| (Jet::constant(p.0), Jet::constant(p.1));
        LegPose {
            hip: j(self.hip),
            knee: j(self.knee),
            ankle: j(self.ankle),
            heel_marker: j(self.heel_marker),
            toe_marker: j(self.toe_marker),
        }
    }
}

impl Scene for Stander {
    fn side_y(&self, side: Side) -> f64 {
        match side {
            Side::Right => -self.y,
            Side::Left => self.y,
        }
    }

    fn leg(&self, _side: Side, _t: f64) -> Result<(LegPose, Option<(i64, f64)>), DynamicsError> {
        Ok((self.pose(), Some((0, 0.0))))
    }

    fn pelvis(&self, _t: f64) -> (Jet, Jet, Jet) {
        (Jet::constant(self.hip.0), Jet::constant(0.0), Jet::constant(self.hip.1))
    }

    fn loads(&self, _t: f64) -> Result<[(Side, ExternalLoad, Option<(i64, f64)>); 2], DynamicsError> {
        let mut out = [(Side::Right, ExternalLoad::swing(), Some((0, 0.0))); 2];
        for (i, side) in Side::BOTH.into_iter().enumerate() {
            let share = if side == Side::Right { self.share } else { 1.0 - self.share };
            let y = self.side_y(side);
            let load = ExternalLoad::new(
                Vec3::new(0.0, 0.0, share * self.weight),
                Vec3::zeros(),
                Vec3::new(self.cop_x, y, 0.0),
                Vec3::new(self.toe_marker.0, y, self.toe_marker.1),
            );
            out[i] = (side, load, Some((0, 0.0)));
        }
        let _ = &self.params;
        Ok(out)
    }
}

/// Generated trial with its ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticTrial {
    pub profile: GaitProfile,
    pub meta: TrialMeta,
    pub markers: MarkerSeries,
    pub grf: Vec<GrfSample>,
    pub lengths: SegmentLengths,
    pub params: LegParams,
    /// Ground-truth moments at the marker timestamps, per side.
    pub truth: BTreeMap<Side, JointMomentSeries>,
    pub events: GaitEvents,
    /// Right stride whose stance lands on the force plate (heel strike to heel strike).
    pub instrumented_stride: Option<(f64, f64)>,
    /// Sum of plate loads: total vertical reaction per plate sample before sand attenuation (N).
    pub surface_fz: Vec<f64>,
}

/// Generate a trial from `profile`.
pub fn synthesize_gait(
    profile: &GaitProfile,
    table: &AnthropometricTable,
    calibration: &CalibrationCurve,
    constants: &Constants,
) -> Result<SyntheticTrial, DynamicsError> {
    profile.validate()?;
    let participant = Participant::new(profile.participant_id.clone(), profile.height_m, profile.mass_kg)
        .map_err(|e| DynamicsError::Generation(e.to_string()))?;
    let geo = Geometry::new(profile.height_m);
    let lengths = geo.lengths();
    let params =
        segment_parameters(&participant, table, &lengths).map_err(|e| DynamicsError::Generation(e.to_string()))?;
    if 2.0 * params.total_mass() > profile.mass_kg {
        return Err(DynamicsError::Generation("leg masses exceed body mass".into()));
    }
    let g = constants.gravity;
    let zeta = match profile.sand_depth_cm {
        Some(d) => calibration.zeta_at(d).map_err(|e| DynamicsError::Generation(e.to_string()))?,
        None => 1.0,
    };
    let walker;
    let stander;
    let scene: &dyn Scene = match profile.kind {
        ProfileKind::Walk => {
            walker = Walker::new(profile, geo, params, g);
            &walker
        }
        ProfileKind::Stand => {
            stander = Stander::new(profile, geo, params, g)?;
            &stander
        }
    };

    let n_frames = (profile.duration_s * profile.marker_rate_hz).round() as usize;
    let factor = (profile.grf_rate_hz / profile.marker_rate_hz).round() as usize;
    let frame_times: Vec<f64> = (0..n_frames).map(|i| i as f64 / profile.marker_rate_hz).collect();

    // Markers and ground truth at the marker rate.
    let labels = marker_labels();
    let mut tracks: Vec<Vec<Option<Vec3>>> = vec![Vec::with_capacity(n_frames); labels.len()];
    let mut truth: BTreeMap<Side, JointMomentSeries> = BTreeMap::new();
    for side in Side::BOTH {
        truth.insert(side, empty_series(side, profile.mass_kg));
    }
    for &t in &frame_times {
        let (px, _, pz) = scene.pelvis(t);
        let pelvis = Vec3::new(px.v, 0.0, pz.v);
        let mut positions: BTreeMap<String, Vec3> = BTreeMap::new();
        for (suffix, offset) in [("ASIS", Vec3::new(0.06, 0.12, 0.10)), ("PSIS", Vec3::new(-0.06, 0.05, 0.12))] {
            positions.insert(format!("R-{suffix}"), pelvis + Vec3::new(offset.x, -offset.y, offset.z));
            positions.insert(format!("L-{suffix}"), pelvis + offset);
        }
        let loads = scene.loads(t)?;
        for side in Side::BOTH {
            let (pose, _) = scene.leg(side, t)?;
            let y = scene.side_y(side);
            let out = if side == Side::Right { -0.06 } else { 0.06 };
            let at = |p: (Jet, Jet)| Vec3::new(p.0.v, y, p.1.v);
            let l = side.letter();
            positions.insert(format!("{l}-hip"), at(pose.hip));
            positions.insert(format!("{l}-knee"), at(pose.knee));
            positions.insert(format!("{l}-ankle"), at(pose.ankle));
            positions.insert(format!("{l}-heel"), at(pose.heel_marker));
            positions.insert(format!("{l}-toe"), at(pose.toe_marker));
            positions.insert(
                format!("{l}-thigh"),
                0.5 * (at(pose.hip) + at(pose.knee)) + Vec3::new(0.0, out, 0.0),
            );
            positions.insert(
                format!("{l}-shank"),
                0.5 * (at(pose.knee) + at(pose.ankle)) + Vec3::new(0.0, out, 0.0),
            );

            let (frame, _) = leg_frames(&pose, &params);
            let load = loads.iter().find(|(s, _, _)| *s == side).expect("both sides").1;
            let series = truth.get_mut(&side).expect("inserted");
            push_truth(series, t, &load, &frame, &params, g);
        }
        for (track, label) in tracks.iter_mut().zip(&labels) {
            track.push(Some(positions[label.as_str()]));
        }
    }
    let markers = MarkerSeries::new(frame_times.clone(), labels.into_iter().zip(tracks).collect())
        .map_err(|e| DynamicsError::Generation(e.to_string()))?;

    // Force plate at the plate rate: the instrumented right stance only.
    let plate_origin = Vec3::from(profile.plate_origin_m);
    let n_grf = n_frames * factor;
    let mut grf = Vec::with_capacity(n_grf);
    let mut surface_fz = Vec::with_capacity(n_grf);
    for i in 0..n_grf {
        let t = i as f64 / profile.grf_rate_hz;
        let loads = scene.loads(t)?;
        let (_, load, stance) = loads[0];
        let on_plate = match profile.kind {
            ProfileKind::Walk => matches!(stance, Some((0, _))),
            ProfileKind::Stand => true,
        };
        let mut sample = GrfSample::zero(t, profile.terrain);
        if on_plate {
            let mut f = load.reaction;
            surface_fz.push(f.z);
            f.z *= zeta;
            let lever = load.cop - plate_origin;
            sample.force = f;
            sample.moment = lever.cross(&f) + load.free_moment;
            sample.cop = [lever.x, lever.y];
        } else {
            surface_fz.push(0.0);
        }
        grf.push(sample);
    }

    let (events, instrumented_stride) = match profile.kind {
        ProfileKind::Walk => {
            let w = Walker::new(profile, geo, params, g);
            let mut ev = GaitEvents::default();
            for side in Side::BOTH {
                let mut se = SideEvents::default();
                for k in -2..((profile.duration_s / profile.stride_time_s).ceil() as i64 + 2) {
                    let hs = w.hs_time(side, k);
                    let to = hs + w.stance;
                    if (0.0..profile.duration_s).contains(&hs) {
                        se.heel_strikes.push(hs);
                    }
                    if (0.0..profile.duration_s).contains(&to) {
                        se.toe_offs.push(to);
                    }
                }
                *ev.side_mut(side) = se;
            }
            let hs = profile.first_heel_strike_s;
            (ev, Some((hs, hs + profile.stride_time_s)))
        }
        ProfileKind::Stand => (GaitEvents::default(), None),
    };

    let meta = TrialMeta {
        markers: "markers.csv".into(),
        grf: "grf.csv".into(),
        participant_id: profile.participant_id.clone(),
        height_m: profile.height_m,
        mass_kg: profile.mass_kg,
        terrain: profile.terrain,
        sand_depth_cm: profile.sand_depth_cm,
        sync_offset_s: 0.0,
        plate_origin_m: profile.plate_origin_m,
    };
    Ok(SyntheticTrial {
        profile: profile.clone(),
        meta,
        markers,
        grf,
        lengths,
        params,
        truth,
        events,
        instrumented_stride,
        surface_fz,
    })
}

fn marker_labels() -> Vec<String> {
    let mut out = Vec::new();
    for side in Side::BOTH {
        for name in ["ASIS", "PSIS", "hip", "thigh", "knee", "shank", "ankle", "heel", "toe"] {
            out.push(format!("{}-{name}", side.letter()));
        }
    }
    out
}

fn empty_series(side: Side, body_mass: f64) -> JointMomentSeries {
    JointMomentSeries {
        side,
        body_mass,
        times: Vec::new(),
        ankle: Vec::new(),
        knee: Vec::new(),
        hip: Vec::new(),
        ankle_force: Vec::new(),
        knee_force: Vec::new(),
        hip_force: Vec::new(),
        divergences: Vec::new(),
    }
}

/// Ground truth from the closed forms, with the thigh-mass term added to the hip.
fn push_truth(series: &mut JointMomentSeries, t: f64, load: &ExternalLoad, frame: &LegFrame, p: &LegParams, g: f64) {
    let ankle = closed_form::ankle_moment(load, &frame.foot, &p.foot, g);
    let knee = closed_form::knee_moment(load, frame, p, g);
    let hip = closed_form::hip_moment(load, frame, p, g);
    let gz = g * Vec3::z();
    let fa = closed_form::ankle_force(load, &frame.foot, &p.foot, g);
    let fk = fa + p.shank.mass * (frame.shank.acc + gz);
    let fh = fk + p.thigh.mass * (frame.thigh.acc + gz);
    series.times.push(t);
    series.ankle.push(ankle.y);
    series.knee.push(-knee.y);
    series.hip.push(hip.y);
    series.ankle_force.push(fa);
    series.knee_force.push(fk);
    series.hip_force.push(fh);
}

impl SyntheticTrial {
    /// Write `trial.toml`, `markers.csv`, `grf.csv`, `truth_moments.csv` and
    /// `truth_events.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join("trial.toml"), &self.meta.to_toml())?;
        write_atomic(&dir.join("markers.csv"), &write_markers(&self.markers))?;
        write_atomic(&dir.join("grf.csv"), &write_grf(&self.grf))?;
        write_atomic(&dir.join("truth_moments.csv"), &write_moment_table(self.truth.values(), |_, _| true))?;
        write_atomic(&dir.join("truth_events.csv"), &write_event_table(&self.events))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generate(p: &GaitProfile) -> Result<SyntheticTrial, DynamicsError> {
        synthesize_gait(p, &AnthropometricTable::default(), &CalibrationCurve::default(), &Constants::default())
    }

    #[test]
    fn quintic_end_conditions() {
        let q = Quintic::new((1.0, -2.0, 3.0), (4.0, 0.5, -1.0), 0.7);
        let a = q.eval(Jet::variable(0.0));
        let b = q.eval(Jet::variable(0.7));
        assert!((a.v - 1.0).abs() < 1e-12 && (a.d1 + 2.0).abs() < 1e-12 && (a.d2 - 3.0).abs() < 1e-12);
        assert!((b.v - 4.0).abs() < 1e-12 && (b.d1 - 0.5).abs() < 1e-11 && (b.d2 + 1.0).abs() < 1e-10);
    }

    #[test]
    fn default_walk_generates() {
        let trial = generate(&GaitProfile::default()).unwrap();
        assert_eq!(trial.markers.len(), 300);
        assert_eq!(trial.grf.len(), 3000);
        assert_eq!(trial.events.right.heel_strikes, vec![1.0, 2.2]);
        let peak = trial.grf.iter().map(|s| s.force.z).fold(0.0, f64::max);
        let w = 74.5 * 9.81;
        assert!(peak > 0.9 * w && peak < 1.6 * w, "peak {peak}");
    }

    #[test]
    fn positions_are_continuous() {
        // Pose and its derivatives match across every phase boundary.
        let p = GaitProfile::default();
        let geo = Geometry::new(p.height_m);
        let params = segment_parameters(
            &Participant::new("x", p.height_m, p.mass_kg).unwrap(),
            &AnthropometricTable::default(),
            &geo.lengths(),
        )
        .unwrap();
        let w = Walker::new(&p, geo, params, 9.81);
        let hs = w.hs_time(Side::Right, 0);
        for b in [0.0, w.heel_rocker, w.heel_off, w.stance, p.stride_time_s] {
            let before = w.foot_pose(Side::Right, Jet::variable(hs + b - 1e-7));
            let after = w.foot_pose(Side::Right, Jet::variable(hs + b + 1e-7));
            for (x, y) in [
                (before.heel.0, after.heel.0),
                (before.heel.1, after.heel.1),
                (before.beta, after.beta),
            ] {
                assert!((x.v - y.v).abs() < 1e-5, "value jump at {b}");
                assert!((x.d1 - y.d1).abs() < 1e-4, "velocity jump at {b}: {} vs {}", x.d1, y.d1);
                assert!((x.d2 - y.d2).abs() < 1e-2, "acceleration jump at {b}: {} vs {}", x.d2, y.d2);
            }
        }
    }

    #[test]
    fn standing_is_static() {
        let trial = generate(&GaitProfile::standing()).unwrap();
        let w = 74.5 * 9.81;
        assert!(trial.grf.iter().all(|s| (s.force.z - w).abs() <= 1e-9 * w));
        let right = &trial.truth[&Side::Right];
        assert!(right.hip.iter().all(|m| m.abs() < 1e-9), "{}", right.hip[0]);
        assert!(right.ankle[0].abs() > 1.0);
    }

    #[test]
    fn penetration_rejected() {
        let p = GaitProfile {
            clearance_m: -0.1,
            ..GaitProfile::default()
        };
        let err = generate(&p).unwrap_err();
        assert!(err.to_string().contains("penetrates"), "{err}");
    }

    #[test]
    fn overextension_rejected() {
        let p = GaitProfile {
            hip_height_m: 1.2,
            ..GaitProfile::default()
        };
        assert!(generate(&p).unwrap_err().to_string().contains("over-extended"));
    }

    #[test]
    fn sand_attenuates_plate() {
        let p = GaitProfile {
            terrain: Terrain::Sand,
            sand_depth_cm: Some(14.0),
            kind: ProfileKind::Stand,
            ..GaitProfile::default()
        };
        let trial = generate(&p).unwrap();
        assert!((trial.grf[0].force.z - 0.81 * 74.5 * 9.81).abs() < 1e-9);
    }
}
