//! Parallel vs sequential comparison for the data-parallel inner loops:
//! the confluence sweep and a batch of numeric partial-isometry checks.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use wold::confluence::{confluence_sweep, confluence_sweep_seq};
use wold::graph::{corresponding_graph, GeneratorSpec};
use wold::groupoid::ShadowedGraph;
use wold::numeric::{is_partial_isometry, make_truncated_shift};
use wold::par;

fn bench_confluence(c: &mut Criterion) {
    let graph = ShadowedGraph::new(
        corresponding_graph(&GeneratorSpec::finite_shift("x", 1), 6).unwrap(),
    );
    let mut group = c.benchmark_group("confluence_sweep");
    for words in [200usize, 1000] {
        group.bench_with_input(BenchmarkId::new("parallel", words), &words, |b, &w| {
            b.iter(|| confluence_sweep(&graph, w, 4, 24, 7))
        });
        group.bench_with_input(BenchmarkId::new("sequential", words), &words, |b, &w| {
            b.iter(|| confluence_sweep_seq(&graph, w, 4, 24, 7))
        });
    }
    group.finish();
}

fn bench_numeric_batch(c: &mut Criterion) {
    let shifts: Vec<_> = (1..=24).map(|k| make_truncated_shift(k, 96).unwrap()).collect();
    let mut group = c.benchmark_group("partial_isometry_batch");
    group.bench_function("parallel", |b| {
        b.iter(|| par::map_collect(&shifts, |a| is_partial_isometry(a, 1e-12).unwrap()))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| par::map_collect_seq(&shifts, |a| is_partial_isometry(a, 1e-12).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, bench_confluence, bench_numeric_batch);
criterion_main!(benches);
