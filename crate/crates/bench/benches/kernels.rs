use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use spurio_bench::hs_fixture;
use spurio_core::attacks::{run_attack, AttackSpec};
use spurio_core::classifier::{dataset_loss_gradients, train, TrainConfig};
use spurio_core::saliency::{build_type_saliency_table, input_x_gradient};
use spurio_core::TestSet;

fn gradients(c: &mut Criterion) {
    let f = hs_fixture(256);
    c.bench_function("loss_gradients/256 docs", |b| {
        b.iter(|| dataset_loss_gradients(&f.model, &f.docs, 1e-5).unwrap())
    });
}

fn saliency(c: &mut Criterion) {
    let f = hs_fixture(256);
    c.bench_function("input_x_gradient/doc", |b| {
        b.iter(|| input_x_gradient(&f.model, &f.docs[0].input).unwrap())
    });
    c.bench_function("type_table/256 docs", |b| {
        b.iter(|| build_type_saliency_table(&f.model, &f.docs).unwrap())
    });
}

fn training(c: &mut Criterion) {
    let f = hs_fixture(512);
    let config = TrainConfig {
        epochs: 1,
        ..TrainConfig::default()
    };
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    group.bench_function("one epoch/512 docs", |b| {
        b.iter_batched(|| f.model.clone(), |m| train(m, &f.docs, &config).unwrap(), BatchSize::LargeInput)
    });
    group.finish();
}

fn attacks(c: &mut Criterion) {
    let f = hs_fixture(256);
    let test = TestSet::new(f.docs.to_vec());
    c.bench_function("loo/256 docs", |b| {
        b.iter(|| run_attack(&f.model, &f.vocab, &test, &AttackSpec::loo()).unwrap())
    });
}

criterion_group!(benches, gradients, saliency, training, attacks);
criterion_main!(benches);
