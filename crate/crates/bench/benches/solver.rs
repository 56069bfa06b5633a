use std::hint::black_box;

use arctic_bench::{market_workload, network_workload};
use arctic_core::{balanced_flow, max_flow, solve};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for n in [2usize, 4, 6, 8] {
        let insts = market_workload(n, 8);
        group.bench_with_input(BenchmarkId::from_parameter(n), &insts, |b, insts| {
            b.iter(|| {
                for inst in insts {
                    black_box(solve(inst).expect("solver succeeds"));
                }
            })
        });
    }
    group.finish();
}

fn bench_flows(c: &mut Criterion) {
    let nets = network_workload(20, 12, 16);
    c.bench_function("max_flow/20x12", |b| {
        b.iter(|| {
            for n in &nets {
                black_box(max_flow(n));
            }
        })
    });
    c.bench_function("balanced_flow/20x12", |b| {
        b.iter(|| {
            for n in &nets {
                black_box(balanced_flow(n));
            }
        })
    });
}

criterion_group!(benches, bench_solve, bench_flows);
criterion_main!(benches);
