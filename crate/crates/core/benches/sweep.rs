use std::hint::black_box;

use aggsched::{
    build_ddas_tree, compute_layers, generate_network, run_sweep, schedule, CandidatePolicy, Execution, Figure,
    Params,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_fig2a_10_trials");
    group.sample_size(10);
    let spec = Figure::ActiveSlots.spec(3, 10, 42, false);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| run_sweep(black_box(&spec), exec).unwrap())
        });
    }
    group.finish();
}

fn bench_schedule(c: &mut Criterion) {
    let mut group = c.benchmark_group("schedule_n");
    for n in [50usize, 200, 400] {
        let net = generate_network(&Params { node_count: n, ..Params::default() }).unwrap();
        let tree = build_ddas_tree(&net, &compute_layers(&net));
        for policy in [CandidatePolicy::AllLeaves, CandidatePolicy::DeepestLayerOnly] {
            group.bench_with_input(BenchmarkId::new(format!("{policy:?}"), n), &n, |b, _| {
                b.iter(|| schedule(black_box(&net), &tree, policy))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_schedule);
criterion_main!(benches);
