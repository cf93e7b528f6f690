use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rotpro::data::{generate_synthetic, SyntheticSpec};
use rotpro::eval::evaluate_filtered;
use rotpro::exec::{self, Mode};
use rotpro::training::{backward, init_parameters, sample_negatives, TrainConfig};

fn modes() -> [(Mode, &'static str); 2] {
    [
        (Mode::Sequential, "sequential"),
        (Mode::Parallel, "parallel"),
    ]
}

fn bench_backward(c: &mut Criterion) {
    let data = generate_synthetic(&SyntheticSpec {
        chains: 40,
        length: 8,
        keep: 0.3,
        seed: 1,
    })
    .unwrap();
    let store = data.store;
    let cfg = TrainConfig {
        dim: 64,
        ..TrainConfig::default()
    };
    let model = init_parameters(&cfg, store.n_entities(), store.n_relations());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let positives: Vec<_> = store.train().iter().cycle().take(256).copied().collect();
    let batch = sample_negatives(&store, &positives, 32, false, &mut rng).unwrap();

    let mut group = c.benchmark_group("backward");
    for (mode, name) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            exec::set_mode(mode);
            b.iter(|| backward(&model, &cfg, &batch))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("evaluate_filtered");
    for (mode, name) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            exec::set_mode(mode);
            b.iter(|| evaluate_filtered(&model, &store, store.test(), None).unwrap())
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_backward
}
criterion_main!(benches);
