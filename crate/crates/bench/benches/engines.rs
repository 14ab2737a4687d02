//! Benchmarks for the hot paths: half-edge pairing, the event-driven
//! engine, and the round-based oracle, all on the reference law at
//! n = 100,000 (the size the statistical verification suite runs at).

use cascade_bench::{reference_sequence, reference_workload, BENCH_SEED};
use cascade_core::cascade::{run_continuous, run_discrete, SnapshotSpec};
use cascade_core::cgm::build_multigraph;
use cascade_core::seed::{mix_seed, STREAM_BUILD, STREAM_RUN};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

const N: usize = 100_000;

fn bench_build_multigraph(c: &mut Criterion) {
    let seq = reference_sequence(N);
    c.bench_function("build_multigraph_n1e5", |b| {
        b.iter(|| {
            black_box(
                build_multigraph(black_box(&seq), mix_seed(BENCH_SEED, STREAM_BUILD)).unwrap(),
            )
        })
    });
}

fn bench_run_continuous(c: &mut Criterion) {
    let (seq, graph) = reference_workload(N);
    c.bench_function("run_continuous_n1e5", |b| {
        b.iter(|| {
            black_box(
                run_continuous(
                    black_box(&graph),
                    seq.thresholds(),
                    mix_seed(BENCH_SEED, STREAM_RUN),
                    SnapshotSpec::Off,
                )
                .unwrap(),
            )
        })
    });
}

fn bench_run_discrete(c: &mut Criterion) {
    let (seq, graph) = reference_workload(N);
    c.bench_function("run_discrete_n1e5", |b| {
        b.iter(|| black_box(run_discrete(black_box(&graph), seq.thresholds()).unwrap()))
    });
}

criterion_group! {
    name = engines;
    config = Criterion::default().sample_size(20);
    targets = bench_build_multigraph, bench_run_continuous, bench_run_discrete
}
criterion_main!(engines);
