use serde::{Deserialize, Serialize};

/// Scalar stance features of the normalized GRF curves (body-weight units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrfFeatures {
    /// Largest propulsive (positive) longitudinal force, never below 0.
    pub fx_fwd_peak: f64,
    /// Largest braking (negative) longitudinal force, never above 0.
    pub fx_bwd_peak: f64,
    /// First local maximum of the vertical force.
    pub fz_hs_peak: f64,
    pub fz_hump1: f64,
    pub fz_hump2: Option<f64>,
    /// Set when the vertical curve has fewer than two local maxima.
    pub hump2_missing: bool,
}

/// Indices of interior local maxima. A flat top counts once, at its first
/// sample, when both neighbours of the plateau are lower.
pub fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        if x[i] > x[i - 1] {
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Extract peak features from stance-normalized `fx` and `fz` curves.
pub fn extract_grf_features(fx: &[f64], fz: &[f64]) -> GrfFeatures {
    let fx_max = fx.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fx_min = fx.iter().copied().fold(f64::INFINITY, f64::min);
    let fz_max = fz.iter().copied().fold(0.0, f64::max);
    let maxima = local_maxima(fz);
    let fz_hs_peak = maxima.first().map_or(fz_max, |&i| fz[i]);
    let (fz_hump1, fz_hump2) = if maxima.len() >= 2 {
        let mut by_height = maxima.clone();
        by_height.sort_by(|&a, &b| fz[b].total_cmp(&fz[a]).then(a.cmp(&b)));
        let (a, b) = (by_height[0].min(by_height[1]), by_height[0].max(by_height[1]));
        (fz[a], Some(fz[b]))
    } else {
        (maxima.first().map_or(fz_max, |&i| fz[i]), None)
    };
    GrfFeatures {
        fx_fwd_peak: fx_max.max(0.0),
        fx_bwd_peak: fx_min.min(0.0),
        fz_hs_peak: fz_hs_peak.max(0.0),
        fz_hump1: fz_hump1.max(0.0),
        fz_hump2: fz_hump2.map(|v| v.max(0.0)),
        hump2_missing: fz_hump2.is_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..101).map(|k| k as f64 / 100.0).collect()
    }

    #[test]
    fn equal_humps() {
        // Two Gaussian humps of height 1.03 at 25 % and 75 % stance.
        let g = |p: f64, c: f64| (-(p - c).powi(2) / 0.01).exp();
        let fz: Vec<f64> = grid()
            .iter()
            .map(|&p| 1.03 * g(p, 0.25).max(g(p, 0.75)))
            .collect();
        let f = extract_grf_features(&vec![0.0; 101], &fz);
        assert!((f.fz_hump1 - 1.03).abs() < 1e-12);
        assert!((f.fz_hump2.unwrap() - 1.03).abs() < 1e-12);
        assert!((f.fz_hs_peak - 1.03).abs() < 1e-12);
        assert!(!f.hump2_missing);
    }

    #[test]
    fn ramp_has_no_second_hump() {
        let fz = grid();
        let f = extract_grf_features(&fz, &fz);
        assert!(f.hump2_missing && f.fz_hump2.is_none());
        assert_eq!(f.fz_hump1, 1.0);
    }

    #[test]
    fn longitudinal_extrema() {
        let fx: Vec<f64> = grid()
            .iter()
            .map(|&p| {
                let s = (std::f64::consts::TAU * p).sin();
                if s >= 0.0 {
                    0.15 * s
                } else {
                    0.10 * s
                }
            })
            .collect();
        let f = extract_grf_features(&fx, &vec![0.0; 101]);
        assert!((f.fx_fwd_peak - 0.15).abs() < 1e-12);
        assert!((f.fx_bwd_peak + 0.10).abs() < 1e-12);
        let pos = extract_grf_features(&[0.1, 0.2], &[0.0, 0.0]);
        assert_eq!(pos.fx_bwd_peak, 0.0);
    }

    #[test]
    fn plateau_counts_once() {
        assert_eq!(local_maxima(&[0.0, 1.0, 1.0, 1.0, 0.5, 2.0, 0.0]), vec![1, 5]);
        assert!(local_maxima(&[0.0, 1.0, 1.0]).is_empty());
    }

    #[test]
    fn humps_ordered_by_phase() {
        let fz = [0.0, 0.8, 0.5, 1.2, 0.4, 1.0, 0.0];
        let f = extract_grf_features(&[0.0; 7], &fz);
        assert_eq!((f.fz_hump1, f.fz_hump2), (1.2, Some(1.0)));
        assert_eq!(f.fz_hs_peak, 0.8);
    }
}
