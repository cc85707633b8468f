use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use terragait_bench::{record, walking_trial};
use terragait_core::pipeline::{analyze_trial, AnalysisConfig, References};
use terragait_core::{AnthropometricTable, CalibrationCurve, MarkerSchema};

fn analyze(c: &mut Criterion) {
    let schema = MarkerSchema::default();
    let table = AnthropometricTable::default();
    let calibration = CalibrationCurve::default();
    let refs = References {
        schema: &schema,
        table: &table,
        calibration: &calibration,
    };
    let config = AnalysisConfig::default();
    let trial = walking_trial(3.0);
    let rec = record(&trial, &schema);
    c.bench_function("analyze_trial_3s", |b| b.iter(|| analyze_trial(black_box(&rec), refs, &config).unwrap()));
    c.bench_function("synthesize_gait_3s", |b| b.iter(|| walking_trial(black_box(3.0))));
}

criterion_group!(benches, analyze);
criterion_main!(benches);
