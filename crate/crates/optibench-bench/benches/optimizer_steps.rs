use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use optibench::param_store::{rng_uniform, Rng};
use optibench::{clip_gradient, init_state, step, ClipConfig, HyperParams, OptimizerKind};

const DIM: usize = 1000;

fn bench_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    group.throughput(Throughput::Elements(DIM as u64));
    let hp = HyperParams {
        eta0: 1e-3,
        gamma: 0.999,
        clip_value: Some(1.0),
        ..HyperParams::default()
    };
    for kind in OptimizerKind::ALL {
        group.bench_function(BenchmarkId::from_parameter(kind), |b| {
            let mut rng = Rng::new(7);
            let mut theta = rng_uniform(&mut rng, -1.0, 1.0, DIM).unwrap();
            let grad = rng_uniform(&mut rng, -1.0, 1.0, DIM).unwrap();
            let mut state = init_state(kind, theta.shape());
            b.iter(|| {
                step(
                    black_box(&mut state),
                    black_box(&mut theta),
                    black_box(&grad),
                    &hp,
                    3,
                )
                .unwrap()
            });
        });
    }
    group.finish();
}

fn bench_clip(c: &mut Criterion) {
    let mut group = c.benchmark_group("clip_gradient");
    group.throughput(Throughput::Elements(DIM as u64));
    let mut rng = Rng::new(11);
    let big = rng_uniform(&mut rng, -10.0, 10.0, DIM).unwrap();
    let clip = ClipConfig::at(1.0).unwrap();
    group.bench_function("rescaled", |b| {
        b.iter(|| clip_gradient(black_box(&big), clip).unwrap())
    });
    let small = rng_uniform(&mut rng, -1e-3, 1e-3, DIM).unwrap();
    group.bench_function("passthrough", |b| {
        b.iter(|| clip_gradient(black_box(&small), clip).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_steps, bench_clip);
criterion_main!(benches);
