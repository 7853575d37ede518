use anovaboost::anova::f_scores;
use anovaboost::gbt::{best_split, build_tree, grad_hess, train, Objective, SplitParams, TrainParams};
use anovaboost::pipeline::{run_cv_on, NoObserver, RunConfig};
use anovaboost::synthetic::{generate, SyntheticSpec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn wide(n_samples: usize, n_features: usize) -> anovaboost::synthetic::SyntheticData {
    generate(&SyntheticSpec {
        n_samples,
        n_features,
        n_informative: 10,
        ..SyntheticSpec::default()
    })
    .unwrap()
}

fn bench_anova(c: &mut Criterion) {
    let mut group = c.benchmark_group("f_scores");
    for d in [100, 1664] {
        let data = wide(600, d);
        group.bench_with_input(BenchmarkId::from_parameter(d), &data.table, |b, t| {
            b.iter(|| f_scores(black_box(t)).unwrap())
        });
    }
    group.finish();
}

fn bench_split(c: &mut Criterion) {
    let data = wide(600, 67);
    let x = data.table.values();
    let targets: Vec<f64> = data.table.labels().iter().map(|&l| l as f64).collect();
    let raw = vec![0.0; targets.len()];
    let gh = grad_hess(&Objective::BinaryLogistic, &targets, &raw).unwrap();
    let rows: Vec<usize> = (0..x.rows()).collect();
    let params = SplitParams {
        lambda: 1.0,
        gamma: 0.0,
        min_child_weight: 1.0,
    };
    c.bench_function("best_split/600x67", |b| {
        b.iter(|| best_split(black_box(&rows), &gh.grad, &gh.hess, x, &params))
    });
    let tp = TrainParams::default();
    c.bench_function("build_tree/600x67/depth6", |b| {
        b.iter(|| build_tree(black_box(&gh.grad), &gh.hess, x, &tp).unwrap())
    });
}

fn bench_train(c: &mut Criterion) {
    let data = wide(500, 67);
    let params = TrainParams::default();
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    group.bench_function("binary/500x67/100rounds", |b| {
        b.iter(|| train(black_box(&data.table), Objective::BinaryLogistic, &params).unwrap())
    });
    let config = RunConfig {
        n_features: Some(5),
        ..RunConfig::default()
    };
    let small = generate(&SyntheticSpec::default()).unwrap();
    group.bench_function("run_cv/synthetic", |b| {
        b.iter(|| run_cv_on(black_box(&small.table), &small.encoding, &config, &NoObserver).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_anova, bench_split, bench_train);
criterion_main!(benches);
