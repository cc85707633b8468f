use serde::Serialize;

use super::{ExternalLoad, LegFrame, SegmentFrame};
use crate::model::{LegParams, SegmentParams};
use crate::types::Vec3;

/// Force and moment a proximal segment applies to the distal subsystem at a joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointLoad {
    pub force: Vec3,
    pub moment: Vec3,
}

/// Loads at the three joints of one leg at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegJointLoads {
    pub ankle: JointLoad,
    pub knee: JointLoad,
    pub hip: JointLoad,
}

/// Newton-Euler balance of one segment.
///
/// `dist_force` and `dist_moment` act on the segment, the force applied at
/// `dist_lever` (relative to the proximal joint). Returns the load the
/// proximal neighbour must apply at the proximal joint.
fn segment_balance(
    s: &SegmentFrame,
    p: &SegmentParams,
    g: f64,
    dist_force: Vec3,
    dist_moment: Vec3,
    dist_lever: Vec3,
) -> JointLoad {
    let inertial = p.mass * (s.acc + g * Vec3::z());
    let force = inertial - dist_force;
    let moment = Vec3::new(0.0, p.inertia * s.omega_dot, 0.0) + (p.com_offset * s.e).cross(&inertial)
        - dist_moment
        - dist_lever.cross(&dist_force);
    JointLoad { force, moment }
}

/// Segment-by-segment pass from the foot to the hip. Each segment's proximal
/// load, reversed, is the distal load of the next segment up.
pub fn recursive_leg_dynamics(load: &ExternalLoad, frame: &LegFrame, p: &LegParams, g: f64) -> LegJointLoads {
    // COP relative to the ankle: toe minus r, with the toe at l_f along the foot.
    let cop_lever = p.foot.length * frame.foot.e - load.r;
    let ankle = segment_balance(&frame.foot, &p.foot, g, load.reaction, load.free_moment, cop_lever);
    let knee = segment_balance(
        &frame.shank,
        &p.shank,
        g,
        -ankle.force,
        -ankle.moment,
        p.shank.length * frame.shank.e,
    );
    let hip = segment_balance(
        &frame.thigh,
        &p.thigh,
        g,
        -knee.force,
        -knee.moment,
        p.thigh.length * frame.thigh.e,
    );
    LegJointLoads { ankle, knee, hip }
}
