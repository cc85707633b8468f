//! Closed-form ankle, knee and hip moments, kept as an independent check on
//! the recursive pass.
//!
//! These expressions are written with `F_G` the force the foot applies to the
//! ground, `M_G` the free moment, `r` from the COP to the toe, and segment
//! unit vectors `e` pointing from the distal to the proximal joint (the
//! opposite of [`SegmentState::e`](crate::kinematics::SegmentState)). The
//! resulting moments are those the proximal segment applies to the distal
//! subsystem, the same quantity the recursive pass returns.

use super::{ExternalLoad, LegFrame, SegmentFrame};
use crate::model::{LegParams, SegmentParams};
use crate::types::Vec3;

/// Segment inputs in closed-form convention.
#[derive(Debug, Clone, Copy)]
struct Seg {
    e: Vec3,
    /// m (a + g e_z)
    inertial: Vec3,
    /// I omega_dot about Y
    spin: Vec3,
}

fn seg(s: &SegmentFrame, p: &SegmentParams, g: f64) -> Seg {
    Seg {
        e: -s.e,
        inertial: p.mass * (s.acc + g * Vec3::z()),
        spin: Vec3::new(0.0, p.inertia * s.omega_dot, 0.0),
    }
}

fn segs(frame: &LegFrame, p: &LegParams, g: f64) -> (Seg, Seg, Seg) {
    (seg(&frame.foot, &p.foot, g), seg(&frame.shank, &p.shank, g), seg(&frame.thigh, &p.thigh, g))
}

/// Ankle force `F_D + m_f (a_f + g e_z)` with `F_D = F_G`.
pub fn ankle_force(load: &ExternalLoad, foot: &SegmentFrame, pf: &SegmentParams, g: f64) -> Vec3 {
    load.f_g() + pf.mass * (foot.acc + g * Vec3::z())
}

/// `M_P^F = -M_G - (r + l_f e_f) x F_G - l_p^f e_f x m_f (a_f + g e_z) + I_f w_f`.
pub fn ankle_moment(load: &ExternalLoad, foot: &SegmentFrame, pf: &SegmentParams, g: f64) -> Vec3 {
    let f = seg(foot, pf, g);
    let (fg, mg, r) = (load.f_g(), load.m_g(), load.r);
    -mg - (r + pf.length * f.e).cross(&fg) - (pf.com_offset * f.e).cross(&f.inertial) + f.spin
}

/// Knee moment `M_P^S`.
pub fn knee_moment(load: &ExternalLoad, frame: &LegFrame, p: &LegParams, g: f64) -> Vec3 {
    let (f, s, _) = segs(frame, p, g);
    let (fg, mg, r) = (load.f_g(), load.m_g(), load.r);
    let (lf, ls) = (p.foot.length, p.shank.length);
    -mg - (r + lf * f.e + ls * s.e).cross(&fg) + f.spin + s.spin
        - (p.foot.com_offset * f.e + ls * s.e).cross(&f.inertial)
        - (p.shank.com_offset * s.e).cross(&s.inertial)
}

/// Hip moment `M_P^T` in the printed form, which has no thigh-mass lever term.
pub fn hip_moment_printed(load: &ExternalLoad, frame: &LegFrame, p: &LegParams, g: f64) -> Vec3 {
    let (f, s, t) = segs(frame, p, g);
    let (fg, mg, r) = (load.f_g(), load.m_g(), load.r);
    let (lf, ls, lt) = (p.foot.length, p.shank.length, p.thigh.length);
    -(r + lf * f.e + ls * s.e + lt * t.e).cross(&fg)
        - (p.shank.com_offset * s.e + lt * t.e).cross(&s.inertial)
        - (p.foot.com_offset * f.e + ls * s.e + lt * t.e).cross(&f.inertial)
        + f.spin
        + s.spin
        + t.spin
        - mg
}

/// The term absent from [`hip_moment_printed`]: `l_p^t e_t x m_t (a_t + g e_z)`.
/// The complete hip moment is `hip_moment_printed - thigh_mass_term`.
pub fn thigh_mass_term(frame: &LegFrame, p: &LegParams, g: f64) -> Vec3 {
    let (_, _, t) = segs(frame, p, g);
    (p.thigh.com_offset * t.e).cross(&t.inertial)
}

/// Hip moment with the thigh-mass term included.
pub fn hip_moment(load: &ExternalLoad, frame: &LegFrame, p: &LegParams, g: f64) -> Vec3 {
    hip_moment_printed(load, frame, p, g) - thigh_mass_term(frame, p, g)
}
