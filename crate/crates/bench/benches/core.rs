use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaudin_rsk::cmcells::{default_cell_points, right_cells, CellOptions};
use gaudin_rsk::combinatorics::{rs_permutation, rsk, rsk_inverse};
use gaudin_rsk::liealg::basis_for;
use gaudin_rsk::spectralflow::bank::OperatorBank;
use gaudin_rsk::spectralflow::{run_flow_with_bank, FlowOptions};
use gaudin_rsk_bench::{flow_points, random_matrices, random_permutations};

fn bench_rsk(c: &mut Criterion) {
    let mut g = c.benchmark_group("rsk");
    for size in [3usize, 6, 10] {
        let mats = random_matrices(size, size, 3, 64, 1);
        g.bench_with_input(BenchmarkId::new("forward", size), &mats, |b, mats| {
            b.iter(|| mats.iter().map(|m| rsk(black_box(m))).count())
        });
        let pairs: Vec<_> = mats.iter().map(rsk).collect();
        g.bench_with_input(BenchmarkId::new("inverse", size), &pairs, |b, pairs| {
            b.iter(|| pairs.iter().map(|(p, q)| rsk_inverse(p, q, size, size).unwrap()).count())
        });
    }
    let perms = random_permutations(12, 64, 2);
    g.bench_function("rs_permutation_12", |b| b.iter(|| perms.iter().map(|w| rs_permutation(black_box(w))).count()));
    g.finish();
}

fn bench_bank(c: &mut Criterion) {
    let mut g = c.benchmark_group("operator_bank");
    g.sample_size(10);
    for (r, n, k) in [(2usize, 2usize, vec![2u32, 2]), (3, 3, vec![1, 1, 1]), (2, 3, vec![2, 1, 2])] {
        let basis = basis_for(r, n, &k, None).unwrap();
        let id = format!("{r}x{n} k={k:?} dim={}", basis.dim());
        g.bench_function(id, |b| b.iter(|| OperatorBank::new(black_box(&basis)).unwrap()));
    }
    g.finish();
}

fn bench_flow(c: &mut Criterion) {
    let mut g = c.benchmark_group("flow");
    g.sample_size(10);
    let basis = basis_for(2, 3, &[1, 1, 1], None).unwrap();
    let bank = OperatorBank::new(&basis).unwrap();
    let (z, q) = (flow_points(3, 0.0), flow_points(2, -1.2));
    g.bench_function("2x3 k=(1,1,1)", |b| b.iter(|| run_flow_with_bank(&bank, &z, &q, &FlowOptions::default()).unwrap()));
    for n in [3usize, 4] {
        let (z, q) = default_cell_points(n);
        g.bench_function(format!("right cells n={n}"), |b| b.iter(|| right_cells(n, &z, &q, &CellOptions::default()).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench_rsk, bench_bank, bench_flow);
criterion_main!(benches);
