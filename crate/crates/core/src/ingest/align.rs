use super::{GrfSample, IngestError, MarkerSeries, TrialRecord};

/// A trial whose force-plate stream has been put on the marker timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedTrial {
    pub record: TrialRecord,
    /// Index in `record.markers` of the first frame inside the overlap.
    pub first_frame: usize,
    /// Marker frames inside the overlap of both streams.
    pub markers: MarkerSeries,
    /// One decimated force-plate sample per entry of `markers`, stamped with the marker time.
    pub grf: Vec<GrfSample>,
    /// Full-rate force-plate stream with `sync_offset_s` applied, restricted to the overlap.
    pub grf_full: Vec<GrfSample>,
    /// Number of force-plate samples per marker frame.
    pub factor: usize,
}

/// Ratio of the marker interval to the force-plate interval, rounded.
pub fn decimation_factor(marker_dt: f64, grf_dt: f64) -> usize {
    ((marker_dt / grf_dt).round() as usize).max(1)
}

/// Resample the force-plate stream onto the marker timestamps.
///
/// Each marker time takes the weighted mean of the `factor`-sample window
/// centred on it. For even `factor` the window spans `factor + 1` samples with
/// half weight on the two end samples, so every raw sample contributes equally
/// over a long span and the mean is preserved. Windows are truncated (and
/// renormalized) at the stream ends. The centre of pressure is averaged with
/// vertical-force weights so moments about it stay consistent with the
/// averaged force and moment.
pub fn align_streams(record: &TrialRecord) -> Result<AlignedTrial, IngestError> {
    let off = record.sync_offset_s;
    let grf: Vec<GrfSample> = record
        .grf
        .iter()
        .map(|s| GrfSample {
            time: s.time + off,
            ..*s
        })
        .collect();
    let mt = record.markers.times();
    if grf.len() < 2 || mt.len() < 2 {
        return Err(IngestError::Alignment("streams need at least two samples each".into()));
    }
    let g0 = grf[0].time;
    let g1 = grf[grf.len() - 1].time;
    let gdt = (g1 - g0) / (grf.len() - 1) as f64;
    let lo = mt[0].max(g0);
    let hi = mt[mt.len() - 1].min(g1);
    if lo > hi {
        return Err(IngestError::Alignment(format!(
            "marker span [{}, {}] s and force-plate span [{g0}, {g1}] s do not overlap",
            mt[0],
            mt[mt.len() - 1]
        )));
    }
    let eps = 1e-6 * record.markers.dt();
    let first = mt.iter().position(|&t| t >= lo - eps).expect("lo within marker span");
    let last = mt.iter().rposition(|&t| t <= hi + eps).expect("hi within marker span");
    if last < first {
        return Err(IngestError::Alignment("no marker frame falls inside the overlap".into()));
    }
    let factor = decimation_factor(record.markers.dt(), gdt);
    let half = factor / 2;
    let even = factor % 2 == 0;

    let mut out = Vec::with_capacity(last + 1 - first);
    for &t in &mt[first..=last] {
        let k0 = ((t - g0) / gdt).round() as isize;
        let mut wsum = 0.0;
        let mut fz_w = 0.0;
        let mut acc = GrfSample::zero(t, record.terrain);
        let mut cop_w = [0.0; 2];
        let mut cop_plain = [0.0; 2];
        for k in (k0 - half as isize)..=(k0 + half as isize) {
            if k < 0 || k as usize >= grf.len() {
                continue;
            }
            let w = if even && (k - k0).unsigned_abs() == half { 0.5 } else { 1.0 };
            let s = &grf[k as usize];
            wsum += w;
            acc.force += w * s.force;
            acc.moment += w * s.moment;
            fz_w += w * s.force.z;
            for c in 0..2 {
                cop_w[c] += w * s.force.z * s.cop[c];
                cop_plain[c] += w * s.cop[c];
            }
        }
        acc.force /= wsum;
        acc.moment /= wsum;
        for c in 0..2 {
            acc.cop[c] = if fz_w.abs() > 1e-9 {
                cop_w[c] / fz_w
            } else {
                cop_plain[c] / wsum
            };
        }
        out.push(acc);
    }
    let grf_full = grf
        .into_iter()
        .filter(|s| s.time >= lo - eps && s.time <= hi + eps)
        .collect();
    Ok(AlignedTrial {
        record: record.clone(),
        first_frame: first,
        markers: record.markers.slice(first..last + 1),
        grf: out,
        grf_full,
        factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{MarkerSchema, TrialMeta};
    use crate::types::{Terrain, Vec3};
    use proptest::prelude::*;

    fn record(fz: impl Fn(usize) -> f64, grf_n: usize, frames: usize, offset: f64) -> TrialRecord {
        let schema = MarkerSchema::default();
        let times: Vec<f64> = (0..frames).map(|i| i as f64 * 0.01).collect();
        let tracks = schema
            .labels()
            .iter()
            .map(|l| (l.clone(), vec![Some(Vec3::new(0.0, 0.0, 1.0)); frames]))
            .collect();
        let markers = MarkerSeries::new(times, tracks).unwrap();
        let grf = (0..grf_n)
            .map(|k| GrfSample {
                force: Vec3::new(0.0, 0.0, fz(k)),
                ..GrfSample::zero(k as f64 * 0.001, Terrain::Solid)
            })
            .collect();
        let meta = TrialMeta {
            markers: "m".into(),
            grf: "g".into(),
            participant_id: "P".into(),
            height_m: 1.7,
            mass_kg: 70.0,
            terrain: Terrain::Solid,
            sand_depth_cm: None,
            sync_offset_s: offset,
            plate_origin_m: [0.0; 3],
        };
        TrialRecord::new(&meta, markers, grf, &schema).unwrap()
    }

    #[test]
    fn constant_force_is_preserved() {
        let a = align_streams(&record(|_| 700.0, 3000, 300, 0.0)).unwrap();
        assert_eq!(a.factor, 10);
        assert_eq!(a.grf.len(), 300);
        assert!(a.grf.iter().all(|s| (s.force.z - 700.0).abs() < 1e-9));
    }

    #[test]
    fn alternating_force_averages_to_half() {
        let a = align_streams(&record(|k| if k % 2 == 0 { 0.0 } else { 100.0 }, 3000, 300, 0.0)).unwrap();
        for s in &a.grf[1..a.grf.len() - 1] {
            assert!((s.force.z - 50.0).abs() < 1e-9, "{}", s.force.z);
        }
    }

    #[test]
    fn offset_moves_first_sample() {
        let a = align_streams(&record(|_| 1.0, 3000, 300, 0.5)).unwrap();
        assert!((a.markers.times()[0] - 0.5).abs() < 1e-9);
        assert_eq!(a.first_frame, 50);
        assert_eq!(a.grf.len(), 250);
        assert!((a.grf_full[0].time - 0.5).abs() < 1e-12);
    }

    #[test]
    fn disjoint_streams_rejected() {
        let err = align_streams(&record(|_| 1.0, 100, 300, 10.0)).unwrap_err();
        assert!(matches!(err, IngestError::Alignment(_)));
    }

    proptest! {
        // Away from the edges the decimated stream carries the same mean as the
        // raw stream over any whole number of windows.
        #[test]
        fn decimation_preserves_mean(vals in proptest::collection::vec(0.0f64..1000.0, 200)) {
            let n = 2000;
            let fz = |k: usize| vals[k / 10] + (k % 7) as f64;
            let rec = record(fz, n, 200, 0.0);
            let a = align_streams(&rec).unwrap();
            let (i0, i1) = (20usize, 180usize);
            let dec: f64 = a.grf[i0..i1].iter().map(|s| s.force.z).sum::<f64>() / (i1 - i0) as f64;
            // Raw span covered by frames i0..i1 with trapezoid weights: samples 10*i0-5 ..= 10*(i1-1)+5.
            let mut raw = 0.0;
            let (k0, k1) = (10 * i0 - 5, 10 * (i1 - 1) + 5);
            for k in k0..=k1 {
                let w = if k == k0 || k == k1 { 0.5 } else { 1.0 };
                raw += w * fz(k);
            }
            raw /= (10 * (i1 - i0)) as f64;
            prop_assert!((dec - raw).abs() <= 1e-9 * raw.abs().max(1.0));
        }
    }
}
