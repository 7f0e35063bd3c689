use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use optibench::harness::{run_experiment, ExperimentConfig, ObjectiveSpec, SyntheticMlpSpec};
use optibench::objectives::{make_dataset, mlp_eval, MlpModel, MlpObjective, Objective};
use optibench::param_store::Rng;
use optibench::{HyperParams, OptimizerKind};

fn bench_mlp_eval(c: &mut Criterion) {
    let model = MlpModel::new(20, 8, 0.1).unwrap();
    let dataset = make_dataset(42, 100, 20, 1.0).unwrap();
    let batch = dataset.batch_of(&(0..32).collect::<Vec<_>>()).unwrap();
    let objective = MlpObjective::new(model);
    let mut init_rng = Rng::new(1);
    let theta = objective.initial_params(&mut init_rng);
    c.bench_function("mlp_eval_batch32", |b| {
        let mut rng = Rng::new(2);
        b.iter(|| mlp_eval(objective.model(), black_box(&theta), &batch, &mut rng).unwrap())
    });
}

fn bench_experiment(c: &mut Criterion) {
    let mut cfg = ExperimentConfig::new(
        ObjectiveSpec::SyntheticMlp(SyntheticMlpSpec {
            n: 250,
            d: 10,
            hidden: 8,
            noise: 1.0,
            dropout: 0.1,
            data_seed: 42,
        }),
        OptimizerKind::Composite,
    );
    cfg.hyperparams = HyperParams::with_eta0(0.03);
    cfg.epochs = 1;
    c.bench_function("run_experiment_1epoch", |b| {
        b.iter(|| run_experiment(black_box(&cfg), 42).unwrap())
    });
}

criterion_group!(benches, bench_mlp_eval, bench_experiment);
criterion_main!(benches);
