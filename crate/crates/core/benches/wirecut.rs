use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use wirecut::cost::gate_count_bench;
use wirecut::decomp::{build, Method};
use wirecut::estimator::{demo_cuts, run_monte_carlo_with, LayeredCircuit, PostProcess};
use wirecut::Execution;

const POLICIES: [(&str, Execution); 2] = [
    ("parallel", Execution::Parallel),
    ("sequential", Execution::Sequential),
];

fn monte_carlo(c: &mut Criterion) {
    let circuit = LayeredCircuit::demo();
    let d = [build(Method::Optimal1q, 1).unwrap()];
    let mut g = c.benchmark_group("monte_carlo_demo_20k");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                run_monte_carlo_with(
                    &circuit,
                    &demo_cuts(),
                    &d,
                    &PostProcess::Parity,
                    black_box(20_000),
                    0,
                    exec,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn ptm_sum(c: &mut Criterion) {
    let d = build(Method::Mub, 3).unwrap();
    let mut g = c.benchmark_group("ptm_sum_mub_n3");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(&d).ptm_sum(exec).unwrap())
        });
    }
    g.finish();
}

fn gate_counts(c: &mut Criterion) {
    let mut g = c.benchmark_group("gate_count_n8");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| gate_count_bench(black_box(8), false, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, monte_carlo, ptm_sum, gate_counts);
criterion_main!(benches);
