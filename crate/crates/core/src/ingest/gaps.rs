use super::MarkerSeries;
use crate::types::Vec3;

/// Longest gap (frames) repaired by default: 50 ms at 100 Hz.
pub const DEFAULT_MAX_GAP: usize = 5;

/// Fill interior gaps of at most `max_gap` frames.
///
/// Each coordinate is interpolated by the Lagrange polynomial through up to two
/// valid samples on each side of the gap (cubic when all four exist). Leading,
/// trailing and longer gaps stay missing.
pub fn fill_gaps(series: &MarkerSeries, max_gap: usize) -> MarkerSeries {
    let mut out = series.clone();
    let times = series.times().to_vec();
    for track in out.tracks_mut() {
        fill_track(track, &times, max_gap);
    }
    out
}

fn fill_track(track: &mut [Option<Vec3>], times: &[f64], max_gap: usize) {
    let n = track.len();
    let mut i = 0;
    while i < n {
        if track[i].is_some() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && track[i].is_none() {
            i += 1;
        }
        let end = i; // exclusive
        if start == 0 || end == n || end - start > max_gap {
            continue;
        }
        let mut knots: Vec<usize> = Vec::with_capacity(4);
        if start >= 2 && track[start - 2].is_some() {
            knots.push(start - 2);
        }
        knots.push(start - 1);
        knots.push(end);
        if end + 1 < n && track[end + 1].is_some() {
            knots.push(end + 1);
        }
        for k in start..end {
            let t = times[k];
            let mut v = Vec3::zeros();
            for &a in &knots {
                let mut w = 1.0;
                for &b in &knots {
                    if a != b {
                        w *= (t - times[b]) / (times[a] - times[b]);
                    }
                }
                v += w * track[a].expect("knot is valid");
            }
            track[k] = Some(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(track: Vec<Option<Vec3>>) -> MarkerSeries {
        let times = (0..track.len()).map(|i| i as f64 * 0.01).collect();
        MarkerSeries::new(times, vec![("A".into(), track)]).unwrap()
    }

    #[test]
    fn single_gap_midpoint() {
        let s = series(vec![Some(Vec3::new(0.0, 0.0, 1.0)), None, Some(Vec3::new(0.0, 0.0, 3.0))]);
        let f = fill_gaps(&s, DEFAULT_MAX_GAP);
        let p = f.track("A").unwrap()[1].unwrap();
        assert!((p - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn long_gap_left_missing() {
        let mut t: Vec<Option<Vec3>> = (0..20).map(|i| Some(Vec3::repeat(i as f64))).collect();
        for slot in t.iter_mut().skip(5).take(DEFAULT_MAX_GAP + 1) {
            *slot = None;
        }
        let f = fill_gaps(&series(t), DEFAULT_MAX_GAP);
        assert_eq!(f.missing_count(), DEFAULT_MAX_GAP + 1);
    }

    #[test]
    fn edges_left_missing() {
        let t = vec![None, Some(Vec3::zeros()), Some(Vec3::zeros()), None];
        assert_eq!(fill_gaps(&series(t), 5).missing_count(), 2);
    }

    #[test]
    fn cubic_reproduced_exactly() {
        let f = |k: usize| {
            let t = k as f64 * 0.01;
            Vec3::new(t * t * t, 1.0 - t * t, 2.0 * t)
        };
        let mut t: Vec<Option<Vec3>> = (0..12).map(|k| Some(f(k))).collect();
        for slot in t.iter_mut().skip(4).take(3) {
            *slot = None;
        }
        let filled = fill_gaps(&series(t), 5);
        for k in 4..7 {
            assert!((filled.track("A").unwrap()[k].unwrap() - f(k)).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn no_gaps_is_identity(vals in proptest::collection::vec(-10.0f64..10.0, 3..40)) {
            let t: Vec<Option<Vec3>> = vals.iter().map(|&v| Some(Vec3::new(v, -v, v * 0.5))).collect();
            let s = series(t);
            prop_assert_eq!(fill_gaps(&s, 5), s);
        }
    }
}
