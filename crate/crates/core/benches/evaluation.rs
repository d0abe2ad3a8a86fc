use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sigevo::evo::{
    evaluate_population_sequential, init_probability_vector, sample_population, Evaluator,
};
use sigevo::fixtures;
use sigevo::sim::{FitnessWeights, SimConfig};

fn population_evaluation(c: &mut Criterion) {
    let net = fixtures::grid_network();
    let ev = Evaluator::new(
        &net,
        fixtures::grid_params(),
        SimConfig::default(),
        FitnessWeights::default(),
        100,
    )
    .expect("grid evaluator");
    let mut group = c.benchmark_group("grid_population");
    group.sample_size(10);
    for size in [8usize, 32] {
        let p = init_probability_vector(ev.chromosome_len());
        let pop = sample_population(&p, size, &mut ChaCha8Rng::seed_from_u64(1));
        group.bench_with_input(BenchmarkId::new("sequential", size), &pop, |b, pop| {
            b.iter(|| evaluate_population_sequential(&ev, pop, 1, 0).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", size), &pop, |b, pop| {
            b.iter(|| sigevo::evo::evaluate_population_parallel(&ev, pop, 1, 0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, population_evaluation);
criterion_main!(benches);
