//! Which leg carries the plate load at each frame.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{FootLine, PlateLoad};
use crate::gaitseg::SideEvents;
use crate::types::{Side, Vec3};

/// Source of a leg's external load at one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameLoad {
    /// Stance on the force plate.
    Plate,
    /// Swing: no external load.
    Swing,
    /// Stance off the plate, or phase undetermined.
    Unknown,
}

/// One stance phase; a missing event means the phase runs past the trial edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StanceInterval {
    pub heel_strike: Option<f64>,
    pub toe_off: Option<f64>,
}

impl StanceInterval {
    /// Heel-strike frame included, toe-off frame excluded.
    pub fn contains(&self, t: f64) -> bool {
        self.heel_strike.map_or(true, |h| t >= h) && self.toe_off.map_or(true, |o| t < o)
    }
}

/// Stance phases of one side over `[t_start, t_end]`.
pub fn stance_intervals(events: &SideEvents, t_start: f64, t_end: f64) -> Vec<StanceInterval> {
    let mut out = Vec::new();
    let mut open: Option<Option<f64>> = None;
    let timeline = events.timeline();
    if let Some(&(_, false)) = timeline.first() {
        open = Some(None);
    }
    for (t, is_hs) in timeline {
        if is_hs {
            open = Some(Some(t));
        } else if let Some(hs) = open.take() {
            out.push(StanceInterval {
                heel_strike: hs,
                toe_off: Some(t),
            });
        }
    }
    if let Some(hs) = open {
        out.push(StanceInterval {
            heel_strike: hs,
            toe_off: None,
        });
    }
    out.retain(|iv| iv.heel_strike.map_or(true, |h| h <= t_end) && iv.toe_off.map_or(true, |o| o >= t_start));
    out
}

fn distance_to_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let (p, a, b) = (Vec3::new(p.x, p.y, 0.0), Vec3::new(a.x, a.y, 0.0), Vec3::new(b.x, b.y, 0.0));
    let ab = b - a;
    let len2 = ab.norm_squared();
    let s = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + s * ab)).norm()
}

/// Foot owning the plate contact at each frame: the one whose heel-toe line
/// lies nearest the COP, if within `margin` and the vertical force exceeds
/// `threshold`.
pub(crate) fn plate_owners(
    plate: &[PlateLoad],
    feet: &BTreeMap<Side, FootLine>,
    threshold: f64,
    margin: f64,
) -> Vec<Option<Side>> {
    plate
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.reaction.z <= threshold {
                return None;
            }
            Side::BOTH
                .iter()
                .map(|&s| (s, distance_to_segment(&p.cop, &feet[&s].heel[i], &feet[&s].toe[i])))
                .filter(|(_, d)| *d <= margin)
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(s, _)| s)
        })
        .collect()
}

/// Load source of every frame of `side`.
pub(crate) fn frame_loads(
    times: &[f64],
    events: &SideEvents,
    is_static: bool,
    owners: &[Option<Side>],
    side: Side,
) -> Vec<FrameLoad> {
    let n = times.len();
    let owned = |i: usize| owners[i] == Some(side);
    if is_static {
        let load = if (0..n).any(owned) { FrameLoad::Plate } else { FrameLoad::Unknown };
        return vec![load; n];
    }
    if events.heel_strikes.is_empty() && events.toe_offs.is_empty() {
        return vec![FrameLoad::Unknown; n];
    }
    let mut out = vec![FrameLoad::Swing; n];
    for iv in stance_intervals(events, times[0], times[n - 1]) {
        let frames: Vec<usize> = (0..n).filter(|&i| iv.contains(times[i])).collect();
        let load = if frames.iter().any(|&i| owned(i)) { FrameLoad::Plate } else { FrameLoad::Unknown };
        for i in frames {
            out[i] = load;
        }
    }
    out
}
