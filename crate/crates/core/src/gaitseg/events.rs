use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::SegmentationError;
use crate::ingest::{MarkerSchema, MarkerSeries};
use crate::kinematics::{differentiate, filter_track};
use crate::types::Side;

/// Detector thresholds (config keys use the same names).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EventThresholds {
    /// Heel strike requires |forward heel speed| below this (m/s).
    pub hs_forward_speed: f64,
    /// Toe off requires the upward toe speed after the crossing to exceed this (m/s).
    pub to_vertical_speed: f64,
    pub min_stance_s: f64,
    pub min_swing_s: f64,
}

impl Default for EventThresholds {
    fn default() -> Self {
        EventThresholds {
            hs_forward_speed: 0.2,
            to_vertical_speed: 0.05,
            min_stance_s: 0.15,
            min_swing_s: 0.15,
        }
    }
}

impl EventThresholds {
    pub fn validate(&self) -> Result<(), SegmentationError> {
        for (name, v) in [
            ("hs_forward_speed", self.hs_forward_speed),
            ("to_vertical_speed", self.to_vertical_speed),
            ("min_stance_s", self.min_stance_s),
            ("min_swing_s", self.min_swing_s),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SegmentationError::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Event times of one side; heel strikes and toe offs alternate in time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SideEvents {
    pub heel_strikes: Vec<f64>,
    pub toe_offs: Vec<f64>,
}

impl SideEvents {
    /// Events merged in time order; `true` marks a heel strike.
    pub fn timeline(&self) -> Vec<(f64, bool)> {
        let mut all: Vec<(f64, bool)> = self
            .heel_strikes
            .iter()
            .map(|&t| (t, true))
            .chain(self.toe_offs.iter().map(|&t| (t, false)))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        all
    }

    pub fn check_alternation(&self) -> Result<(), SegmentationError> {
        let tl = self.timeline();
        for w in tl.windows(2) {
            if w[0].1 == w[1].1 || w[0].0 >= w[1].0 {
                return Err(SegmentationError::Alternation(describe(&tl)));
            }
        }
        Ok(())
    }

    /// First toe off strictly after `t`.
    pub fn toe_off_after(&self, t: f64) -> Option<f64> {
        self.toe_offs.iter().copied().find(|&x| x > t)
    }

    pub fn heel_strike_after(&self, t: f64) -> Option<f64> {
        self.heel_strikes.iter().copied().find(|&x| x > t)
    }

    /// Whether `t` falls in a stance interval (HS <= t < TO). Times before the
    /// first event or after the last use the nearest event to decide.
    pub fn in_stance(&self, t: f64) -> Option<bool> {
        let tl = self.timeline();
        let last = tl.iter().rev().find(|(te, _)| *te <= t);
        match last {
            Some((_, is_hs)) => Some(*is_hs),
            None => tl.first().map(|(_, is_hs)| !is_hs),
        }
    }
}

fn describe(tl: &[(f64, bool)]) -> String {
    let mut s = String::new();
    for (t, hs) in tl {
        let _ = write!(s, "{}@{t:.3} ", if *hs { "HS" } else { "TO" });
    }
    s.trim_end().to_string()
}

/// Bilateral events.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaitEvents {
    pub right: SideEvents,
    pub left: SideEvents,
}

impl GaitEvents {
    pub fn side(&self, side: Side) -> &SideEvents {
        match side {
            Side::Right => &self.right,
            Side::Left => &self.left,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut SideEvents {
        match side {
            Side::Right => &mut self.right,
            Side::Left => &mut self.left,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    time: f64,
    heel_strike: bool,
    /// Marker height at the event; lower is stronger.
    height: f64,
}

/// Vertex offset (in samples, within [-0.5, 0.5]) of the parabola through three samples.
fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let denom = a - 2.0 * b + c;
    if denom.abs() < 1e-300 {
        0.0
    } else {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    }
}

/// Detect events of one side from filtered marker series sampled at `dt`.
///
/// Heel strike: a local minimum of heel height (first sample of a flat
/// bottom) with forward heel speed below `hs_forward_speed`, refined to
/// sub-frame time by a parabolic fit. Toe off: an upward zero crossing of the
/// toe vertical velocity, located by linear interpolation, after which the
/// upward speed exceeds `to_vertical_speed` before turning down again.
/// Consecutive same-kind detections keep the lower marker height; stance or
/// swing intervals shorter than the configured minimum are removed.
pub fn detect_events(
    t0: f64,
    dt: f64,
    heel_z: &[f64],
    toe_z: &[f64],
    heel_vx: &[f64],
    thresholds: &EventThresholds,
    side: Side,
) -> Result<SideEvents, SegmentationError> {
    thresholds.validate()?;
    let n = heel_z.len();
    if toe_z.len() != n || heel_vx.len() != n {
        return Err(SegmentationError::Parameter("event input series differ in length".into()));
    }
    if n < 3 {
        return Err(SegmentationError::NoEvents(side.to_string()));
    }
    let mut cands = Vec::new();
    for i in 1..n - 1 {
        if heel_z[i] < heel_z[i - 1] && heel_z[i] <= heel_z[i + 1] && heel_vx[i].abs() < thresholds.hs_forward_speed {
            let off = parabolic_offset(heel_z[i - 1], heel_z[i], heel_z[i + 1]);
            cands.push(Candidate {
                time: t0 + (i as f64 + off) * dt,
                heel_strike: true,
                height: heel_z[i],
            });
        }
    }
    let toe_vz = differentiate(toe_z, dt, 1).map_err(|e| SegmentationError::Parameter(e.to_string()))?;
    for i in 0..n - 1 {
        if toe_vz[i] <= 0.0 && toe_vz[i + 1] > 0.0 {
            let peak = toe_vz[i + 1..]
                .iter()
                .take_while(|&&v| v > 0.0)
                .fold(0.0f64, |m, &v| m.max(v));
            if peak <= thresholds.to_vertical_speed {
                continue;
            }
            let frac = toe_vz[i] / (toe_vz[i] - toe_vz[i + 1]);
            cands.push(Candidate {
                time: t0 + (i as f64 + frac) * dt,
                heel_strike: false,
                height: toe_z[i] + frac * (toe_z[i + 1] - toe_z[i]),
            });
        }
    }
    cands.sort_by(|a, b| a.time.total_cmp(&b.time));

    loop {
        let merged = alternate(&cands);
        let pruned = prune_short(&merged, thresholds);
        let stable = pruned.len() == cands.len();
        cands = pruned;
        if stable {
            break;
        }
    }
    if cands.is_empty() {
        return Err(SegmentationError::NoEvents(side.to_string()));
    }
    let out = SideEvents {
        heel_strikes: cands.iter().filter(|c| c.heel_strike).map(|c| c.time).collect(),
        toe_offs: cands.iter().filter(|c| !c.heel_strike).map(|c| c.time).collect(),
    };
    out.check_alternation()?;
    Ok(out)
}

fn alternate(cands: &[Candidate]) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = Vec::with_capacity(cands.len());
    for c in cands {
        match out.last_mut() {
            Some(last) if last.heel_strike == c.heel_strike => {
                if c.height < last.height {
                    *last = *c;
                }
            }
            _ => out.push(*c),
        }
    }
    out
}

/// Drop both events bounding the shortest too-short interval, one interval per call.
fn prune_short(events: &[Candidate], th: &EventThresholds) -> Vec<Candidate> {
    let mut worst: Option<(usize, f64)> = None;
    for (i, w) in events.windows(2).enumerate() {
        let min = if w[0].heel_strike { th.min_stance_s } else { th.min_swing_s };
        let d = w[1].time - w[0].time;
        if d < min && worst.map_or(true, |(_, wd)| d < wd) {
            worst = Some((i, d));
        }
    }
    match worst {
        Some((i, _)) => events
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i && *k != i + 1)
            .map(|(_, c)| *c)
            .collect(),
        None => events.to_vec(),
    }
}

/// Detect bilateral events from heel and toe marker tracks filtered with `window`.
pub fn detect_gait_events(
    markers: &MarkerSeries,
    schema: &MarkerSchema,
    window: usize,
    thresholds: &EventThresholds,
) -> Result<GaitEvents, SegmentationError> {
    let mut events = GaitEvents::default();
    let dt = markers.dt();
    let t0 = markers.times().first().copied().unwrap_or(0.0);
    for side in Side::BOTH {
        let track = |label: &str| -> Result<Vec<crate::Vec3>, SegmentationError> {
            let raw = crate::kinematics::complete_track(markers, label)
                .map_err(|e| SegmentationError::Parameter(e.to_string()))?;
            filter_track(&raw, window).map_err(|e| SegmentationError::Parameter(e.to_string()))
        };
        let heel = track(schema.heel(side))?;
        let toe = track(schema.toe(side))?;
        let heel_z: Vec<f64> = heel.iter().map(|p| p.z).collect();
        let toe_z: Vec<f64> = toe.iter().map(|p| p.z).collect();
        let heel_x: Vec<f64> = heel.iter().map(|p| p.x).collect();
        let heel_vx = differentiate(&heel_x, dt, 1).map_err(|e| SegmentationError::Parameter(e.to_string()))?;
        *events.side_mut(side) = detect_events(t0, dt, &heel_z, &toe_z, &heel_vx, thresholds, side)?;
    }
    Ok(events)
}

/// Times at which the vertical force rises through `fraction` of body weight,
/// linearly interpolated between samples.
pub fn contact_onsets(times: &[f64], fz: &[f64], body_weight: f64, fraction: f64) -> Vec<f64> {
    let level = fraction * body_weight;
    let mut out = Vec::new();
    for i in 1..fz.len().min(times.len()) {
        if fz[i - 1] < level && fz[i] >= level {
            let frac = (level - fz[i - 1]) / (fz[i] - fz[i - 1]);
            out.push(times[i - 1] + frac * (times[i] - times[i - 1]));
        }
    }
    out
}

/// Compare force-plate contact onsets with kinematic heel strikes; returns one
/// message per onset without a heel strike within `tolerance_s`.
pub fn cross_check_contacts(events: &GaitEvents, onsets: &[f64], tolerance_s: f64) -> Vec<String> {
    onsets
        .iter()
        .filter_map(|&t| {
            let near = Side::BOTH
                .iter()
                .flat_map(|s| events.side(*s).heel_strikes.iter())
                .any(|&hs| (hs - t).abs() <= tolerance_s);
            (!near).then(|| format!("force-plate contact at t={t:.3} s has no kinematic heel strike within {tolerance_s} s"))
        })
        .collect()
}

/// Event table: `side,event,time`, heel strikes as `HS` and toe offs as `TO`.
pub fn write_event_table(events: &GaitEvents) -> String {
    let mut out = String::from("side,event,time\n");
    for side in Side::BOTH {
        for (t, hs) in events.side(side).timeline() {
            let _ = writeln!(out, "{side},{},{t}", if hs { "HS" } else { "TO" });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(heel_z: &[f64], toe_z: &[f64]) -> Result<SideEvents, SegmentationError> {
        let vx = vec![0.0; heel_z.len()];
        detect_events(0.0, 0.01, heel_z, toe_z, &vx, &EventThresholds::default(), Side::Right)
    }

    #[test]
    fn flat_trial_has_no_events() {
        let z = vec![0.05; 200];
        assert!(matches!(run(&z, &z), Err(SegmentationError::NoEvents(_))));
    }

    #[test]
    fn periodic_walker() {
        // Heel dips at t = 0.5 + k, toe dips at t = 1.1 + k.
        let n = 400;
        let dip = |t: f64, c: f64| {
            let ph = ((t - c) % 1.0 + 1.0) % 1.0;
            let d = ph.min(1.0 - ph);
            0.02 + 0.1 * d * d
        };
        let heel: Vec<f64> = (0..n).map(|i| dip(i as f64 * 0.01, 0.5)).collect();
        let toe: Vec<f64> = (0..n).map(|i| dip(i as f64 * 0.01, 0.1)).collect();
        let ev = run(&heel, &toe).unwrap();
        assert_eq!(ev.heel_strikes.len(), 4);
        for (k, hs) in ev.heel_strikes.iter().enumerate() {
            assert!((hs - (0.5 + k as f64)).abs() <= 0.01, "{hs}");
        }
        for to in &ev.toe_offs {
            let ph = (to - 0.1).rem_euclid(1.0);
            assert!(ph.min(1.0 - ph) <= 0.01, "{to}");
        }
        ev.check_alternation().unwrap();
    }

    #[test]
    fn close_heel_strikes_merge() {
        let c = |time, height| Candidate {
            time,
            heel_strike: true,
            height,
        };
        let to = Candidate {
            time: 0.6,
            heel_strike: false,
            height: 0.0,
        };
        let merged = alternate(&[c(0.10, 0.03), c(0.11, 0.02), to]);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].time, 0.11);
    }

    #[test]
    fn short_stance_pruned() {
        let th = EventThresholds::default();
        let ev = |time, heel_strike| Candidate {
            time,
            heel_strike,
            height: 0.0,
        };
        let out = prune_short(&[ev(0.0, true), ev(0.6, false), ev(1.0, true), ev(1.05, false)], &th);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn contact_onset_interpolated() {
        let t = [0.0, 0.001, 0.002];
        let fz = [0.0, 20.0, 60.0];
        let on = contact_onsets(&t, &fz, 700.0, 0.05);
        assert_eq!(on.len(), 1);
        assert!((on[0] - 0.001375).abs() < 1e-12);
        let mut ev = GaitEvents::default();
        ev.right.heel_strikes.push(0.0015);
        assert!(cross_check_contacts(&ev, &on, 0.02).is_empty());
        assert_eq!(cross_check_contacts(&ev, &[0.5], 0.02).len(), 1);
    }

    #[test]
    fn stance_lookup() {
        let ev = SideEvents {
            heel_strikes: vec![1.0, 2.2],
            toe_offs: vec![0.3, 1.7],
        };
        assert_eq!(ev.in_stance(0.1), Some(true));
        assert_eq!(ev.in_stance(0.5), Some(false));
        assert_eq!(ev.in_stance(1.2), Some(true));
        assert_eq!(ev.in_stance(2.5), Some(true));
    }
}
