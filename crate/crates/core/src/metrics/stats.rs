use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::MetricsError;

pub fn sample_mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(x: &[f64]) -> f64 {
    let m = sample_mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)).sqrt()
}

/// Paired t-test of `a` against `b` with Cohen's d from the pooled SD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedTest {
    pub n: usize,
    pub mean_a: f64,
    pub sd_a: f64,
    pub mean_b: f64,
    pub sd_b: f64,
    pub mean_diff: f64,
    pub t: f64,
    pub dof: usize,
    /// Two-sided.
    pub p: f64,
    pub cohens_d: f64,
}

pub fn paired_compare(a: &[f64], b: &[f64]) -> Result<PairedTest, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::Parameter(format!("unpaired samples: {} vs {}", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Err(MetricsError::Parameter(format!("need at least 2 pairs, got {n}")));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(MetricsError::Parameter("non-finite sample".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean_diff = sample_mean(&d);
    let sd_diff = sample_sd(&d);
    let (mean_a, mean_b) = (sample_mean(a), sample_mean(b));
    let (sd_a, sd_b) = (sample_sd(a), sample_sd(b));
    let dof = n - 1;
    let (t, p) = if sd_diff == 0.0 {
        if mean_diff != 0.0 {
            return Err(MetricsError::DegenerateVariance(format!(
                "all paired differences equal {mean_diff}"
            )));
        }
        (0.0, 1.0)
    } else {
        let t = mean_diff / (sd_diff / (n as f64).sqrt());
        let dist = StudentsT::new(0.0, 1.0, dof as f64).expect("dof >= 1");
        (t, (2.0 * dist.sf(t.abs())).min(1.0))
    };
    let pooled = ((sd_a * sd_a + sd_b * sd_b) / 2.0).sqrt();
    let cohens_d = if mean_a == mean_b {
        0.0
    } else if pooled == 0.0 {
        return Err(MetricsError::DegenerateVariance("both conditions have zero spread".into()));
    } else {
        (mean_a - mean_b) / pooled
    };
    Ok(PairedTest {
        n,
        mean_a,
        sd_a,
        mean_b,
        sd_b,
        mean_diff,
        t,
        dof,
        p,
        cohens_d,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    /// Two-sided p by Simpson integration of the t density from 0 to |t|.
    fn p_by_quadrature(t: f64, dof: f64) -> f64 {
        let ln_c = ln_gamma((dof + 1.0) / 2.0) - ln_gamma(dof / 2.0) - 0.5 * (dof * std::f64::consts::PI).ln();
        let pdf = |x: f64| (ln_c - (dof + 1.0) / 2.0 * (1.0 + x * x / dof).ln()).exp();
        let n = 20_000;
        let h = t.abs() / n as f64;
        let mut s = pdf(0.0) + pdf(t.abs());
        for i in 1..n {
            s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        1.0 - 2.0 * s * h / 3.0
    }

    /// Lanczos approximation.
    fn ln_gamma(x: f64) -> f64 {
        const G: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        let x = x - 1.0;
        let mut a = G[0];
        let t = x + 7.5;
        for (i, g) in G.iter().enumerate().skip(1) {
            a += g / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }

    #[test]
    fn worked_example() {
        let a = [0.79, 0.71, 0.80, 0.66, 0.74];
        let b = [0.65, 0.62, 0.69, 0.60, 0.63];
        let r = paired_compare(&a, &b).unwrap();
        // d = 0.14, 0.09, 0.11, 0.06, 0.11: mean 0.102, sum of squares 0.00348
        let sd = (0.00348_f64 / 4.0).sqrt();
        let t = 0.102 / (sd / 5f64.sqrt());
        assert!((r.t - t).abs() < 1e-6, "{} vs {t}", r.t);
        assert!((r.p - p_by_quadrature(t, 4.0)).abs() < 1e-6);
        let (sa, sb) = (sample_sd(&a), sample_sd(&b));
        assert!((r.cohens_d - (0.74 - 0.638) / ((sa * sa + sb * sb) / 2.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn identical_inputs() {
        let a = [1.0, 2.5, 3.0, 0.2];
        let r = paired_compare(&a, &a).unwrap();
        assert_eq!((r.t, r.p, r.cohens_d), (0.0, 1.0, 0.0));
    }

    #[test]
    fn degenerate_and_bad_inputs() {
        assert!(matches!(
            paired_compare(&[1.0, 2.0, 3.0], &[0.0, 1.0, 2.0]),
            Err(MetricsError::DegenerateVariance(_))
        ));
        assert!(matches!(paired_compare(&[1.0], &[2.0]), Err(MetricsError::Parameter(_))));
        assert!(matches!(paired_compare(&[1.0, 2.0], &[2.0]), Err(MetricsError::Parameter(_))));
    }

    proptest! {
        #[test]
        fn antisymmetric(a in proptest::collection::vec(-10.0..10.0f64, 5), b in proptest::collection::vec(-10.0..10.0f64, 5)) {
            let (x, y) = (paired_compare(&a, &b), paired_compare(&b, &a));
            if let (Ok(x), Ok(y)) = (x, y) {
                prop_assert_eq!(x.t, -y.t);
                prop_assert_eq!(x.cohens_d, -y.cohens_d);
                prop_assert_eq!(x.p, y.p);
            }
        }

        #[test]
        fn p_matches_quadrature(t in -6.0..6.0f64, dof in 1usize..30) {
            let dist = StudentsT::new(0.0, 1.0, dof as f64).unwrap();
            let p = 2.0 * dist.sf(t.abs());
            prop_assert!((p - p_by_quadrature(t, dof as f64)).abs() < 1e-6);
        }
    }
}
