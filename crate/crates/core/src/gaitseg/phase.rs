use serde::{Deserialize, Serialize};

use super::{SegmentationError, SideEvents};

/// Points on the normalized phase grid (0 %, 1 %, ..., 100 %).
pub const GRID_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseKind {
    /// Heel strike to the next ipsilateral heel strike.
    Cycle,
    /// Heel strike to toe off.
    Stance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: PhaseKind,
}

/// Linear interpolation of `(times, values)` at `t`; `times` strictly increasing.
pub(crate) fn interp(times: &[f64], values: &[f64], t: f64) -> f64 {
    let n = times.len();
    if t <= times[0] {
        return values[0];
    }
    if t >= times[n - 1] {
        return values[n - 1];
    }
    let j = times.partition_point(|&x| x <= t);
    let (t0, t1) = (times[j - 1], times[j]);
    let w = (t - t0) / (t1 - t0);
    values[j - 1] + w * (values[j] - values[j - 1])
}

/// Resample a time series over `window` onto the 101-point phase grid.
pub fn phase_normalize(
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
    kind: PhaseKind,
) -> Result<NormalizedCurve, SegmentationError> {
    let (t0, t1) = window;
    if times.len() != values.len() || times.len() < 2 {
        return Err(SegmentationError::Parameter(
            "series needs at least two samples and matching lengths".into(),
        ));
    }
    if !(t0 < t1) {
        return Err(SegmentationError::Parameter(format!("empty phase window [{t0}, {t1}]")));
    }
    let tol = 1e-9 * (times[times.len() - 1] - times[0]).abs().max(1.0);
    if t0 < times[0] - tol || t1 > times[times.len() - 1] + tol {
        return Err(SegmentationError::Parameter(format!(
            "phase window [{t0}, {t1}] outside series span [{}, {}]",
            times[0],
            times[times.len() - 1]
        )));
    }
    let last = (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|k| k as f64 / last).collect();
    let values = grid.iter().map(|p| interp(times, values, t0 + p * (t1 - t0))).collect();
    Ok(NormalizedCurve { grid, values, kind })
}

/// Timing of one complete ipsilateral cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTiming {
    pub heel_strike: f64,
    pub toe_off: f64,
    pub next_heel_strike: f64,
    pub stance_s: f64,
    pub swing_s: f64,
    pub stance_fraction: f64,
}

/// Stance and swing durations for every complete cycle (HS, TO, HS) of a side.
pub fn stance_swing_durations(events: &SideEvents) -> Result<Vec<StepTiming>, SegmentationError> {
    events.check_alternation()?;
    if events.heel_strikes.len() < 2 {
        return Err(SegmentationError::InsufficientData(format!(
            "need at least 2 heel strikes, found {}",
            events.heel_strikes.len()
        )));
    }
    let mut out = Vec::new();
    for w in events.heel_strikes.windows(2) {
        let (hs, next) = (w[0], w[1]);
        if let Some(to) = events.toe_off_after(hs).filter(|&to| to < next) {
            out.push(StepTiming {
                heel_strike: hs,
                toe_off: to,
                next_heel_strike: next,
                stance_s: to - hs,
                swing_s: next - to,
                stance_fraction: (to - hs) / (next - hs),
            });
        }
    }
    if out.is_empty() {
        return Err(SegmentationError::InsufficientData("no complete HS-TO-HS cycle".into()));
    }
    Ok(out)
}
