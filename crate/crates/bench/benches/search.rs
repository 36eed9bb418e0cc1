// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use metagrammar_bench::{full_grammar, shared_structure, toy_benchmark, toy_corpus};
use metagrammar_core::cegis::{synthesize, BuiltinLimits, EnumerationState};
use metagrammar_core::genetic::{crossover, mutate, CrossoverMask};
use metagrammar_core::metagrammar::{deserialize_matrix, random_instance, serialize_matrix, Binding};

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate");
    for name in ["max2", "lowest_bit"] {
        let g = full_grammar(&toy_benchmark(name));
        group.bench_with_input(BenchmarkId::new("to_size_5", name), &g, |bench, g| {
            bench.iter(|| {
                let mut st = EnumerationState::new(g);
                let mut n = 0;
                while st.size() < 5 && !st.is_exhausted() {
                    n += st.enumerate_next_size().len();
                }
                black_box(n)
            })
        });
    }
    group.finish();
}

fn synthesis(c: &mut Criterion) {
    let mut group = c.benchmark_group("synthesize");
    group.sample_size(20);
    for name in ["max2", "relu", "lowest_bit", "trailing_ones"] {
        let b = toy_benchmark(name);
        let g = full_grammar(&b);
        group.bench_function(name, |bench| {
            bench.iter(|| black_box(synthesize(&b, &g, &BuiltinLimits::default(), Duration::from_secs(10))))
        });
    }
    group.finish();
}

fn operators(c: &mut Criterion) {
    let s = shared_structure();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p1 = random_instance(&s, &mut rng);
    let p2 = random_instance(&s, &mut rng);
    let rate = 1.0 / s.valid_count() as f64;
    c.bench_function("crossover_and_mutate", |bench| {
        bench.iter(|| {
            let mask = CrossoverMask::random(&s, &mut rng);
            let child = crossover(&s, &p1, &p2, &mask).unwrap();
            black_box(mutate(&s, &child, rate, &mut rng))
        })
    });
    let corpus = toy_corpus();
    let bindings: Vec<Binding> = corpus.iter().map(|b| Binding::new(&s, b).unwrap()).collect();
    c.bench_function("instantiate_and_prune_corpus", |bench| {
        bench.iter(|| {
            bindings.iter().map(|bind| bind.instantiate(&p1).prune().map_or(0, |g| g.rule_count())).sum::<usize>()
        })
    });
    c.bench_function("matrix_round_trip", |bench| {
        bench.iter(|| black_box(deserialize_matrix(&serialize_matrix(&s, &p1)).unwrap()))
    });
}

criterion_group!(benches, enumeration, synthesis, operators);
criterion_main!(benches);
