use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ssmkit_bench::{joint_states, prototype, targets};
use ssmkit_core::kinematics::{forward_kinematics, inverse_kinematics};
use ssmkit_core::workspace::{sample_workspace, sampled_polar_band, tilt_extremes};

fn kinematics(c: &mut Criterion) {
    let geom = prototype();
    let states = joint_states(256);
    let poses = targets(&geom, 256);

    c.bench_function("forward_kinematics", |b| {
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % states.len();
            forward_kinematics(&geom, black_box(&states[i]))
        })
    });
    c.bench_function("inverse_kinematics", |b| {
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % poses.len();
            inverse_kinematics(&geom, black_box(&poses[i])).unwrap()
        })
    });
}

fn workspace(c: &mut Criterion) {
    let geom = prototype();
    c.bench_function("tilt_extremes", |b| {
        b.iter(|| {
            tilt_extremes(
                black_box(30f64.to_radians()),
                black_box(110f64.to_radians()),
            )
            .unwrap()
        })
    });
    c.bench_function("sampled_polar_band_4096", |b| {
        b.iter(|| sampled_polar_band(&geom, black_box(4096)).unwrap())
    });
    c.bench_function("sample_workspace_256x256", |b| {
        b.iter(|| sample_workspace(&geom, 256, black_box(256)).unwrap())
    });
}

criterion_group!(benches, kinematics, workspace);
criterion_main!(benches);
