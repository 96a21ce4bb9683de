use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcfg_contacts::contacts::ContactMap;
use pcfg_contacts::grammar::{Alphabet, Grammar, TermId};
use pcfg_contacts::parser::{inside, inside_constrained, neighborhood_mass, viterbi};

fn motif_grammar() -> Grammar {
    // Protein alphabet with the 3+4 non-terminal shape: 60 lexical,
    // 196 branching, 144 contact rules.
    Grammar::full(Alphabet::protein(), 3, 4, true).unwrap()
}

fn random_sequence(n: usize, alphabet_size: usize, seed: u64) -> Vec<TermId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| TermId(rng.random_range(0..alphabet_size))).collect()
}

fn nested_map(n: usize) -> ContactMap {
    ContactMap::new(n, vec![(1, n), (3, n - 2), (5, n - 4)]).unwrap()
}

fn bench_inside(c: &mut Criterion) {
    let g = motif_grammar();
    let mut group = c.benchmark_group("inside");
    for n in [16usize, 32, 64] {
        let x = random_sequence(n, 20, n as u64);
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| inside(&g, black_box(x)).unwrap())
        });
    }
    group.finish();
}

fn bench_inside_constrained(c: &mut Criterion) {
    let g = motif_grammar();
    let mut group = c.benchmark_group("inside_constrained");
    for n in [16usize, 32, 64] {
        let x = random_sequence(n, 20, n as u64);
        let map = nested_map(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &(x, map), |b, (x, map)| {
            b.iter(|| inside_constrained(&g, black_box(x), map).unwrap())
        });
    }
    group.finish();
}

fn bench_viterbi(c: &mut Criterion) {
    let g = motif_grammar();
    let x = random_sequence(32, 20, 7);
    c.bench_function("viterbi/32", |b| {
        b.iter(|| viterbi(&g, black_box(&x)).unwrap())
    });
}

fn bench_neighborhood_mass(c: &mut Criterion) {
    let g = motif_grammar();
    let map = nested_map(32);
    c.bench_function("neighborhood_mass/32", |b| {
        b.iter(|| neighborhood_mass(&g, black_box(&map), 32).unwrap())
    });
}

criterion_group!(
    benches,
    bench_inside,
    bench_inside_constrained,
    bench_viterbi,
    bench_neighborhood_mass
);
criterion_main!(benches);
