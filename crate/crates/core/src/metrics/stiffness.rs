use serde::Serialize;

use super::MetricsError;
use crate::gaitseg::GaitEvents;
use crate::types::Side;

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub n: usize,
}

/// OLS fit of `y` against `x`. Needs at least three samples and a
/// non-constant regressor.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<LinearFit, MetricsError> {
    let fail = |reason: String| MetricsError::Fit {
        segment: "ols".into(),
        reason,
    };
    if x.len() != y.len() {
        return Err(fail(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(fail(format!("{n} samples, need at least 3")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    if sxx <= (1e-12 * scale).powi(2) * nf {
        return Err(fail("regressor is constant".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(LinearFit {
        slope,
        intercept,
        residual: (sse / nf).sqrt(),
        n,
    })
}

/// One stiffness window: slope in N m/(deg kg).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StiffnessFit {
    pub label: String,
    pub start_s: f64,
    pub end_s: f64,
    pub stiffness: f64,
    pub intercept: f64,
    pub angle_min_deg: f64,
    pub angle_max_deg: f64,
    pub residual: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum FitOutcome {
    Ok(StiffnessFit),
    Failed { label: String, reason: String },
}

impl FitOutcome {
    pub fn fit(&self) -> Option<&StiffnessFit> {
        match self {
            FitOutcome::Ok(f) => Some(f),
            FitOutcome::Failed { .. } => None,
        }
    }
}

/// Right-knee stiffness over the stride starting at the right heel strike `r_hs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StiffnessResult {
    /// R-HS to L-TO.
    pub k_f: FitOutcome,
    /// L-TO to L-HS.
    pub k_e: FitOutcome,
    /// R-TO to the next R-HS.
    pub k_swing: FitOutcome,
}

fn window_fit(
    label: &str,
    window: Option<(f64, f64)>,
    times: &[f64],
    angle: &[f64],
    moment: &[f64],
) -> FitOutcome {
    let failed = |reason: String| FitOutcome::Failed {
        label: label.to_string(),
        reason,
    };
    let Some((t0, t1)) = window else {
        return failed("bounding events not found".into());
    };
    let tol = 1e-9;
    let (x, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(angle.iter().zip(moment))
        .filter(|(t, _)| **t >= t0 - tol && **t <= t1 + tol)
        .map(|(_, (a, m))| (*a, *m))
        .unzip();
    match ols_fit(&x, &y) {
        Ok(f) => FitOutcome::Ok(StiffnessFit {
            label: label.to_string(),
            start_s: t0,
            end_s: t1,
            stiffness: f.slope,
            intercept: f.intercept,
            angle_min_deg: x.iter().cloned().fold(f64::INFINITY, f64::min),
            angle_max_deg: x.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            residual: f.residual,
            n: f.n,
        }),
        Err(MetricsError::Fit { reason, .. }) => failed(reason),
        Err(e) => failed(e.to_string()),
    }
}

/// Knee stiffness fits of moment (N m/kg) against angle (deg) for the right
/// stride beginning at `r_hs`.
pub fn knee_stiffness(
    times: &[f64],
    knee_angle_deg: &[f64],
    knee_moment_nmkg: &[f64],
    events: &GaitEvents,
    r_hs: f64,
) -> Result<StiffnessResult, MetricsError> {
    if times.len() != knee_angle_deg.len() || times.len() != knee_moment_nmkg.len() {
        return Err(MetricsError::Parameter("stiffness inputs differ in length".into()));
    }
    let right = events.side(Side::Right);
    let left = events.side(Side::Left);
    let l_to = left.toe_off_after(r_hs);
    let l_hs = l_to.and_then(|t| left.heel_strike_after(t));
    let r_to = right.toe_off_after(r_hs);
    let r_next = r_to.and_then(|t| right.heel_strike_after(t));
    let fit = |label, w| window_fit(label, w, times, knee_angle_deg, knee_moment_nmkg);
    Ok(StiffnessResult {
        k_f: fit("R-HS→L-TO", l_to.map(|t| (r_hs, t))),
        k_e: fit("L-TO→L-HS", l_to.zip(l_hs)),
        k_swing: fit("R-TO→R-HS", r_to.zip(r_next)),
    })
}
