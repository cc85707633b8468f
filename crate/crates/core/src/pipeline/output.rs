//! Text artifacts of one analysed trial.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::TrialAnalysis;
use crate::dynamics::write_moment_table;
use crate::gaitseg::write_event_table;
use crate::metrics::{sample_mean, FitOutcome, STRIDE_WIDTH_NOTE};
use crate::types::{Side, Terrain};

/// Per-trial scalar results, the input of terrain comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub participant_id: String,
    pub height_m: f64,
    pub mass_kg: f64,
    pub terrain: Terrain,
    pub sand_depth_cm: Option<f64>,
    pub zeta: f64,
    pub is_static: bool,
    pub strides: usize,
    /// Metric name to trial mean.
    pub metrics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub flags: Vec<String>,
    pub notes: Vec<String>,
}

impl TrialSummary {
    pub fn from_analysis(a: &TrialAnalysis) -> Self {
        let mut metrics = BTreeMap::new();
        let mut put_mean = |name: &str, values: Vec<f64>| {
            if !values.is_empty() {
                metrics.insert(name.to_string(), sample_mean(&values));
            }
        };
        let s = &a.strides;
        put_mean("stride_length_m", s.iter().map(|m| m.stride_length_m).collect());
        put_mean("stride_length_norm", s.iter().map(|m| m.stride_length_norm).collect());
        put_mean("stride_width_m", s.iter().filter_map(|m| m.stride_width_m).collect());
        put_mean("stride_width_norm", s.iter().filter_map(|m| m.stride_width_norm).collect());
        put_mean("stance_time_s", s.iter().map(|m| m.stance_time_s).collect());
        put_mean("swing_time_s", s.iter().map(|m| m.swing_time_s).collect());
        put_mean("com_variation_norm", s.iter().map(|m| m.com_variation_norm).collect());
        put_mean("avg_velocity_mps", s.iter().map(|m| m.avg_velocity_mps).collect());
        put_mean("avg_velocity_norm", s.iter().map(|m| m.avg_velocity_norm).collect());
        put_mean("hip_flexion_peak_deg", a.peaks.iter().map(|p| p.2.hip_flexion_deg).collect());
        put_mean("knee_flexion_peak_deg", a.peaks.iter().map(|p| p.2.knee_flexion_deg).collect());
        put_mean("ankle_dorsiflexion_peak_deg", a.peaks.iter().map(|p| p.2.ankle_dorsiflexion_deg).collect());
        if let Some(f) = &a.grf_features {
            put_mean("fx_fwd_peak_bw", vec![f.fx_fwd_peak]);
            put_mean("fx_bwd_peak_bw", vec![f.fx_bwd_peak]);
            put_mean("fz_hs_peak_bw", vec![f.fz_hs_peak]);
            put_mean("fz_hump1_bw", vec![f.fz_hump1]);
            put_mean("fz_hump2_bw", f.fz_hump2.into_iter().collect());
        }
        if let Some(k) = &a.stiffness {
            for (name, fit) in [("k_f", &k.k_f), ("k_e", &k.k_e), ("k_swing", &k.k_swing)] {
                put_mean(name, fit.fit().map(|f| f.stiffness).into_iter().collect());
            }
        }
        TrialSummary {
            participant_id: a.participant.id.clone(),
            height_m: a.participant.height_m,
            mass_kg: a.participant.mass_kg,
            terrain: a.terrain,
            sand_depth_cm: a.sand_depth_cm,
            zeta: a.zeta,
            is_static: a.is_static,
            strides: a.strides.len(),
            metrics,
            warnings: a.warnings.clone(),
            flags: a.flags.clone(),
            notes: vec![
                STRIDE_WIDTH_NOTE.to_string(),
                "normalized lengths and velocities are divided by body height".to_string(),
                "knee stiffness is in N m/(deg kg)".to_string(),
            ],
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Moments for frames with a known external load.
pub fn moment_table(a: &TrialAnalysis) -> String {
    write_moment_table(a.moments.values(), |side, i| a.moments_known(side, i))
}

pub fn angle_table(a: &TrialAnalysis) -> String {
    let mut out = String::from("time,side,hip_deg,knee_deg,ankle_deg\n");
    for s in a.angles.values() {
        for i in 0..s.times.len() {
            let _ = writeln!(out, "{},{},{},{},{}", s.times[i], s.side, s.hip[i], s.knee[i], s.ankle[i]);
        }
    }
    out
}

pub fn event_table(a: &TrialAnalysis) -> String {
    write_event_table(&a.events)
}

pub fn stride_table(a: &TrialAnalysis) -> String {
    let mut out = String::from(
        "side,start_s,end_s,stride_length_m,stride_length_norm,stride_width_m,stride_width_norm,\
         stance_time_s,swing_time_s,com_variation_m,com_variation_norm,avg_velocity_mps,avg_velocity_norm,\
         hip_flexion_peak_deg,knee_flexion_peak_deg,ankle_dorsiflexion_peak_deg\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for s in &a.strides {
        let peak = a.peaks.iter().find(|p| p.0 == s.side && p.1 == s.start_s).map(|p| p.2);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.side,
            s.start_s,
            s.end_s,
            s.stride_length_m,
            s.stride_length_norm,
            opt(s.stride_width_m),
            opt(s.stride_width_norm),
            s.stance_time_s,
            s.swing_time_s,
            s.com_variation_m,
            s.com_variation_norm,
            s.avg_velocity_mps,
            s.avg_velocity_norm,
            opt(peak.map(|p| p.hip_flexion_deg)),
            opt(peak.map(|p| p.knee_flexion_deg)),
            opt(peak.map(|p| p.ankle_dorsiflexion_deg)),
        );
    }
    out
}

/// Phase-normalized curves side by side, one row per grid point.
pub fn curve_table(a: &TrialAnalysis) -> String {
    let mut out = String::from("phase");
    for name in a.curves.keys() {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    let rows = a.curves.values().next().map_or(0, |c| c.grid.len());
    for i in 0..rows {
        let phase = a.curves.values().next().expect("nonempty").grid[i];
        let _ = write!(out, "{phase}");
        for c in a.curves.values() {
            let _ = write!(out, ",{}", c.values[i]);
        }
        out.push('\n');
    }
    out
}

pub fn divergence_table(a: &TrialAnalysis) -> String {
    let mut out = String::from("time,side,joint,recursive,closed_form\n");
    for side in Side::BOTH {
        for d in &a.moments[&side].divergences {
            let _ = writeln!(out, "{},{side},{},{},{}", d.time, d.joint, d.recursive, d.closed_form);
        }
    }
    out
}

/// Stiffness fits as CSV, failed fits with an empty slope and the reason.
pub fn stiffness_table(a: &TrialAnalysis) -> String {
    let mut out = String::from("label,start_s,end_s,stiffness,intercept,angle_min_deg,angle_max_deg,residual,n,error\n");
    if let Some(k) = &a.stiffness {
        for fit in [&k.k_f, &k.k_e, &k.k_swing] {
            match fit {
                FitOutcome::Ok(f) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},",
                        f.label, f.start_s, f.end_s, f.stiffness, f.intercept, f.angle_min_deg, f.angle_max_deg, f.residual, f.n
                    );
                }
                FitOutcome::Failed { label, reason } => {
                    let _ = writeln!(out, "{label},,,,,,,,,{}", reason.replace(',', ";"));
                }
            }
        }
    }
    out
}
