use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use terragait_bench::stance_frame;
use terragait_core::dynamics::{closed_form, recursive_leg_dynamics};

fn per_frame(c: &mut Criterion) {
    let (load, leg, p) = stance_frame();
    c.bench_function("recursive_leg_dynamics", |b| {
        b.iter(|| recursive_leg_dynamics(black_box(&load), black_box(&leg), black_box(&p), 9.81))
    });
    c.bench_function("closed_form_ankle_knee_hip", |b| {
        b.iter(|| {
            let a = closed_form::ankle_moment(black_box(&load), &leg.foot, &p.foot, 9.81);
            let k = closed_form::knee_moment(black_box(&load), &leg, &p, 9.81);
            let h = closed_form::hip_moment(black_box(&load), &leg, &p, 9.81);
            (a, k, h)
        })
    });
}

criterion_group!(benches, per_frame);
criterion_main!(benches);
