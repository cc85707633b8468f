use super::KinematicsError;

/// Centred boxcar average. Near the ends the window shrinks symmetrically so
/// it always stays centred on the sample, ending at width 1 on the first and
/// last samples.
pub fn moving_average(x: &[f64], window: usize) -> Result<Vec<f64>, KinematicsError> {
    if window == 0 || window % 2 == 0 {
        return Err(KinematicsError::Parameter(format!(
            "moving-average window must be odd and at least 1, got {window}"
        )));
    }
    if window > x.len() {
        return Err(KinematicsError::Parameter(format!(
            "moving-average window {window} exceeds sequence length {}",
            x.len()
        )));
    }
    let n = x.len();
    let half = window / 2;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().copied().unwrap_or(0.0) + v);
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let h = half.min(i).min(n - 1 - i);
        let (a, b) = (i - h, i + h + 1);
        // Direct summation keeps short windows exact; prefix sums keep long ones fast.
        let sum = if b - a <= 15 {
            x[a..b].iter().sum::<f64>()
        } else {
            prefix[b] - prefix[a]
        };
        out.push(sum / (b - a) as f64);
    }
    Ok(out)
}

/// Finite-difference derivative of uniformly sampled data.
///
/// Interior points use central differences; the end points use one-sided
/// second-order stencils. Three-sample input uses the three-point stencils at
/// every point.
pub fn differentiate(x: &[f64], dt: f64, order: u8) -> Result<Vec<f64>, KinematicsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(KinematicsError::Parameter(format!("time step must be positive, got {dt}")));
    }
    let n = x.len();
    if n < 3 {
        return Err(KinematicsError::Parameter(format!(
            "differentiation needs at least 3 samples, got {n}"
        )));
    }
    let mut out = vec![0.0; n];
    match order {
        1 => {
            for i in 1..n - 1 {
                out[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
            }
            out[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt);
            out[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * dt);
        }
        2 => {
            let dt2 = dt * dt;
            for i in 1..n - 1 {
                out[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) / dt2;
            }
            if n == 3 {
                out[0] = out[1];
                out[2] = out[1];
            } else {
                out[0] = (2.0 * x[0] - 5.0 * x[1] + 4.0 * x[2] - x[3]) / dt2;
                out[n - 1] = (2.0 * x[n - 1] - 5.0 * x[n - 2] + 4.0 * x[n - 3] - x[n - 4]) / dt2;
            }
        }
        other => {
            return Err(KinematicsError::Parameter(format!(
                "derivative order must be 1 or 2, got {other}"
            )))
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn impulse_response() {
        let mut x = vec![0.0; 11];
        x[5] = 1.0;
        let y = moving_average(&x, 5).unwrap();
        for (i, v) in y.iter().enumerate() {
            let expect = if (3..=7).contains(&i) { 0.2 } else { 0.0 };
            assert!((v - expect).abs() < 1e-15, "{i}: {v}");
        }
    }

    #[test]
    fn edge_windows_shrink() {
        let x = [1.0, 2.0, 4.0, 8.0, 16.0];
        let y = moving_average(&x, 5).unwrap();
        assert_eq!(y[0], 1.0);
        assert!((y[1] - 7.0 / 3.0).abs() < 1e-15);
        assert!((y[2] - 31.0 / 5.0).abs() < 1e-15);
        assert_eq!(y[4], 16.0);
    }

    #[test]
    fn bad_windows_rejected() {
        assert!(moving_average(&[1.0; 5], 4).is_err());
        assert!(moving_average(&[1.0; 5], 0).is_err());
        assert!(moving_average(&[1.0; 5], 7).is_err());
        assert!(differentiate(&[1.0, 2.0], 0.01, 1).is_err());
        assert!(differentiate(&[1.0; 4], 0.0, 1).is_err());
        assert!(differentiate(&[1.0; 4], 0.01, 3).is_err());
    }

    #[test]
    fn quadratic_second_derivative() {
        let dt = 0.01;
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * dt).powi(2)).collect();
        let d2 = differentiate(&x, dt, 2).unwrap();
        for v in &d2 {
            assert!((v - 2.0).abs() < 1e-9, "{v}");
        }
        let d1 = differentiate(&x, dt, 1).unwrap();
        for (i, v) in d1.iter().enumerate() {
            assert!((v - 2.0 * i as f64 * dt).abs() < 1e-9);
        }
    }

    #[test]
    fn sine_derivative_second_order() {
        let f = |dt: f64| {
            let x: Vec<f64> = (-5..=5).map(|i| (i as f64 * dt).sin()).collect();
            (differentiate(&x, dt, 1).unwrap()[5] - 1.0).abs()
        };
        let (e1, e2) = (f(0.02), f(0.01));
        assert!(e1 < 1e-4);
        assert!((e1 / e2 - 4.0).abs() < 0.1, "ratio {}", e1 / e2);
    }

    #[test]
    fn three_samples() {
        let x = [0.0, 0.01f64.powi(2), 0.02f64.powi(2)];
        let d2 = differentiate(&x, 0.01, 2).unwrap();
        assert!(d2.iter().all(|v| (v - 2.0).abs() < 1e-9));
    }

    proptest! {
        #[test]
        fn constants_pass_through(c in -1e3f64..1e3, n in 1usize..60, w in 0usize..10) {
            let window = (2 * w + 1).min(if n % 2 == 1 { n } else { n - 1 });
            let y = moving_average(&vec![c; n], window).unwrap();
            for v in y {
                prop_assert!((v - c).abs() <= 1e-9 * c.abs().max(1.0));
            }
        }

        #[test]
        fn affine_interior_exact(a in -10.0f64..10.0, b in -10.0f64..10.0, w in 0usize..8) {
            let window = 2 * w + 1;
            let x: Vec<f64> = (0..40).map(|i| a + b * i as f64).collect();
            let y = moving_average(&x, window).unwrap();
            // Symmetric windows keep affine signals exact everywhere.
            for (yi, xi) in y.iter().zip(&x) {
                prop_assert!((yi - xi).abs() <= 1e-9 * xi.abs().max(1.0));
            }
        }

        #[test]
        fn offset_commutes(vals in proptest::collection::vec(-5.0f64..5.0, 9..40), c in -100.0f64..100.0) {
            let shifted: Vec<f64> = vals.iter().map(|v| v + c).collect();
            let a = moving_average(&vals, 7).unwrap();
            let b = moving_average(&shifted, 7).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x + c - y).abs() <= 1e-9);
            }
        }

        #[test]
        fn derivative_of_integral(freq in 0.5f64..3.0, phase in 0.0f64..6.0) {
            // Integrate cos analytically (sin) and differentiate back.
            let dt = 0.01;
            let x: Vec<f64> = (0..200).map(|i| (freq * i as f64 * dt + phase).sin() / freq).collect();
            let d = differentiate(&x, dt, 1).unwrap();
            for i in 1..199 {
                let exact = (freq * i as f64 * dt + phase).cos();
                prop_assert!((d[i] - exact).abs() <= freq * freq * dt * dt);
            }
        }
    }
}
