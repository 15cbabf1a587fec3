use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ssmkit_bench::joint1_map;
use ssmkit_core::dynamics::{inverse_dynamics, payload_curve};
use ssmkit_core::identification::{extract_steady_segments, fit_friction, SegmentOptions};
use ssmkit_core::synth::{sweep_log, SweepConfig};
use ssmkit_core::{FitOptions, JointTrajectory};

fn identification(c: &mut Criterion) {
    let (spec, params, map) = joint1_map();
    let opts = FitOptions {
        test_load: 2.0,
        ..Default::default()
    };
    c.bench_function("fit_friction_12_points", |b| {
        b.iter(|| fit_friction(black_box(&map), &spec, &opts).unwrap())
    });

    let log = sweep_log(
        &spec,
        &params,
        &SweepConfig {
            load: 2.0,
            torque_noise: 0.01,
            ..Default::default()
        },
    )
    .unwrap();
    let samples = log.joint(1);
    let seg = SegmentOptions::default();
    c.bench_function("extract_steady_segments", |b| {
        b.iter(|| extract_steady_segments(black_box(&samples), &seg).unwrap())
    });
}

fn dynamics(c: &mut Criterion) {
    let (spec, params, _) = joint1_map();
    let traj = JointTrajectory::trapezoidal(150.0, 600.0, 2.0, 200.0).unwrap();
    c.bench_function("inverse_dynamics_trapezoid", |b| {
        b.iter(|| inverse_dynamics(&spec, &params, |_| 1.0, black_box(&traj)).unwrap())
    });
    let grid: Vec<f64> = (1..=1000).map(|k| k as f64 * 0.5).collect();
    c.bench_function("payload_curve_1000", |b| {
        b.iter(|| payload_curve(&spec, &params, 1.0, black_box(&grid)).unwrap())
    });
}

criterion_group!(benches, identification, dynamics);
criterion_main!(benches);
