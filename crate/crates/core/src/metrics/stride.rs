use serde::Serialize;

use super::MetricsError;
use crate::gaitseg::{interp, GaitEvents, NormalizedCurve};
use crate::model::Participant;
use crate::types::{Side, Vec3};

/// Spatiotemporal parameters of one stride (heel strike to the next
/// ipsilateral heel strike). `*_norm` fields are divided by body height.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrideMetrics {
    pub side: Side,
    pub start_s: f64,
    pub end_s: f64,
    pub stride_length_m: f64,
    pub stride_length_norm: f64,
    /// Lateral distance to the contralateral heel strike inside the stride.
    pub stride_width_m: Option<f64>,
    pub stride_width_norm: Option<f64>,
    pub stance_time_s: f64,
    pub swing_time_s: f64,
    pub com_variation_m: f64,
    pub com_variation_norm: f64,
    pub avg_velocity_mps: f64,
    /// 1/s
    pub avg_velocity_norm: f64,
}

/// Trajectories sampled on a common timeline.
#[derive(Debug, Clone, Copy)]
pub struct StrideInputs<'a> {
    pub times: &'a [f64],
    pub right_heel: &'a [Vec3],
    pub left_heel: &'a [Vec3],
    pub com: &'a [Vec3],
    pub pelvis: &'a [Vec3],
}

impl StrideInputs<'_> {
    fn heel(&self, side: Side) -> &[Vec3] {
        match side {
            Side::Right => self.right_heel,
            Side::Left => self.left_heel,
        }
    }
}

fn at(times: &[f64], track: &[Vec3], t: f64) -> Vec3 {
    let comp = |k: usize| {
        let v: Vec<f64> = track.iter().map(|p| p[k]).collect();
        interp(times, &v, t)
    };
    Vec3::new(comp(0), comp(1), comp(2))
}

/// Metrics for every complete stride of `side`.
pub fn stride_metrics(
    events: &GaitEvents,
    side: Side,
    inputs: &StrideInputs<'_>,
    participant: &Participant,
) -> Result<Vec<StrideMetrics>, MetricsError> {
    let n = inputs.times.len();
    if n < 2 || [inputs.right_heel, inputs.left_heel, inputs.com, inputs.pelvis].iter().any(|v| v.len() != n) {
        return Err(MetricsError::Parameter("stride inputs must share one timeline of at least two samples".into()));
    }
    let (t_first, t_last) = (inputs.times[0], inputs.times[n - 1]);
    let own = events.side(side);
    let other = events.side(side.other());
    let h = participant.height_m;
    let mut out = Vec::new();
    for pair in own.heel_strikes.windows(2) {
        let (t0, t1) = (pair[0], pair[1]);
        if t0 < t_first || t1 > t_last {
            continue;
        }
        let Some(to) = own.toe_off_after(t0).filter(|&to| to < t1) else {
            return Err(MetricsError::InsufficientData(format!(
                "{side} stride {t0:.3}-{t1:.3} s has no toe off"
            )));
        };
        let heel = inputs.heel(side);
        let (p0, p1) = (at(inputs.times, heel, t0), at(inputs.times, heel, t1));
        let stride_length = p1.x - p0.x;
        let width = other
            .heel_strikes
            .iter()
            .find(|&&t| t > t0 && t < t1)
            .map(|&t| (at(inputs.times, inputs.heel(side.other()), t).y - p0.y).abs());
        let com_z: Vec<f64> = inputs
            .times
            .iter()
            .zip(inputs.com)
            .filter(|(t, _)| **t >= t0 && **t <= t1)
            .map(|(_, c)| c.z)
            .collect();
        let com_variation = com_z.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - com_z.iter().cloned().fold(f64::INFINITY, f64::min);
        let velocity =
            (at(inputs.times, inputs.pelvis, t1).x - at(inputs.times, inputs.pelvis, t0).x) / (t1 - t0);
        out.push(StrideMetrics {
            side,
            start_s: t0,
            end_s: t1,
            stride_length_m: stride_length,
            stride_length_norm: stride_length / h,
            stride_width_m: width,
            stride_width_norm: width.map(|w| w / h),
            stance_time_s: to - t0,
            swing_time_s: t1 - to,
            com_variation_m: com_variation,
            com_variation_norm: com_variation / h,
            avg_velocity_mps: velocity,
            avg_velocity_norm: velocity / h,
        });
    }
    if out.is_empty() {
        return Err(MetricsError::InsufficientData(format!("no complete {side} stride")));
    }
    Ok(out)
}

/// Peak flexion (hip, knee) and peak dorsiflexion (ankle), degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakAngles {
    pub hip_flexion_deg: f64,
    pub knee_flexion_deg: f64,
    pub ankle_dorsiflexion_deg: f64,
}

pub fn peak_angles(hip: &NormalizedCurve, knee: &NormalizedCurve, ankle: &NormalizedCurve) -> PeakAngles {
    let max = |c: &NormalizedCurve| c.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    PeakAngles {
        hip_flexion_deg: max(hip),
        knee_flexion_deg: max(knee),
        ankle_dorsiflexion_deg: max(ankle),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaitseg::{PhaseKind, SideEvents};

    fn straight_walk() -> (Vec<f64>, Vec<Vec3>, Vec<Vec3>, Vec<Vec3>, GaitEvents) {
        // Heels planted during stance, sliding linearly during swing.
        let times: Vec<f64> = (0..=300).map(|i| i as f64 * 0.01).collect();
        let heel = |offset: f64, y: f64| -> Vec<Vec3> {
            times
                .iter()
                .map(|&t| {
                    let k = ((t - offset) / 1.2).floor();
                    let u = t - offset - 1.2 * k;
                    let x = if u < 0.72 { 1.27 * k } else { 1.27 * (k + (u - 0.72) / 0.48) };
                    Vec3::new(x, y, 0.03)
                })
                .collect()
        };
        let right = heel(0.2, -0.06);
        let left = heel(0.8, 0.06);
        let com = times.iter().map(|&t| Vec3::new(t, 0.0, 0.9 + 0.02 * (t * 10.0).sin())).collect();
        let mut ev = GaitEvents::default();
        ev.right = SideEvents {
            heel_strikes: vec![0.2, 1.4, 2.6],
            toe_offs: vec![0.92, 2.12],
        };
        ev.left = SideEvents {
            heel_strikes: vec![0.8, 2.0],
            toe_offs: vec![0.32, 1.52, 2.72],
        };
        (times, right, left, com, ev)
    }

    #[test]
    fn straight_walk_metrics() {
        let (times, right, left, com, ev) = straight_walk();
        let p = Participant::new("p", 1.717, 70.0).unwrap();
        let inputs = StrideInputs {
            times: &times,
            right_heel: &right,
            left_heel: &left,
            com: &com,
            pelvis: &com,
        };
        let s = stride_metrics(&ev, Side::Right, &inputs, &p).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s[0].stride_length_m - 1.27).abs() < 1e-9);
        assert!((s[0].stride_length_norm - 0.7397).abs() < 1e-4);
        assert!((s[0].stride_width_m.unwrap() - 0.12).abs() < 1e-12);
        assert!((s[0].stance_time_s - 0.72).abs() < 1e-12);
        assert!((s[0].swing_time_s - 0.48).abs() < 1e-12);
        assert!((s[0].avg_velocity_mps - 1.0).abs() < 1e-9);
        assert!((s[0].stride_length_norm * 1.717 - s[0].stride_length_m).abs() < 1e-12);
    }

    #[test]
    fn flat_com_has_no_variation() {
        let (times, right, left, _, ev) = straight_walk();
        let com: Vec<Vec3> = times.iter().map(|&t| Vec3::new(t, 0.0, 0.9)).collect();
        let p = Participant::new("p", 1.7, 70.0).unwrap();
        let inputs = StrideInputs {
            times: &times,
            right_heel: &right,
            left_heel: &left,
            com: &com,
            pelvis: &com,
        };
        let s = stride_metrics(&ev, Side::Left, &inputs, &p).unwrap();
        assert_eq!(s[0].com_variation_m, 0.0);
    }

    #[test]
    fn incomplete_cycle_rejected() {
        let (times, right, left, com, mut ev) = straight_walk();
        ev.right.heel_strikes.truncate(1);
        let p = Participant::new("p", 1.7, 70.0).unwrap();
        let inputs = StrideInputs {
            times: &times,
            right_heel: &right,
            left_heel: &left,
            com: &com,
            pelvis: &com,
        };
        assert!(matches!(
            stride_metrics(&ev, Side::Right, &inputs, &p),
            Err(MetricsError::InsufficientData(_))
        ));
    }

    fn curve(f: impl Fn(f64) -> f64) -> NormalizedCurve {
        let grid: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        NormalizedCurve {
            values: grid.iter().map(|&p| f(p)).collect(),
            grid,
            kind: PhaseKind::Cycle,
        }
    }

    #[test]
    fn peaks() {
        let c = curve(|_| 10.0);
        assert_eq!(peak_angles(&c, &c, &c).hip_flexion_deg, 10.0);
        let knee = curve(|p| 75.21 * (-(p - 0.7).powi(2) * 40.0).exp());
        assert!((peak_angles(&c, &knee, &c).knee_flexion_deg - 75.21).abs() < 1e-12);
        let sine = curve(|p| 12.0 * (2.0 * std::f64::consts::PI * p).sin());
        let shifted = curve(|p| 12.0 * (2.0 * std::f64::consts::PI * (p + 0.25)).sin());
        let a = peak_angles(&c, &c, &sine).ankle_dorsiflexion_deg;
        assert!((a - 12.0).abs() < 1e-12);
        assert_eq!(a, peak_angles(&c, &c, &shifted).ankle_dorsiflexion_deg);
    }
}
