use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use sybilbelief::{build_mrf, lbp_step, run_lbp, LbpOptions, MessageTable, MrfParams};
use sybilbelief_bench::pa_fixture;

fn step(c: &mut Criterion) {
    let mut group = c.benchmark_group("lbp_step");
    for n in [10_000, 100_000] {
        let (g, labels) = pa_fixture(n, 1);
        let model = build_mrf(&g, &labels, MrfParams::default()).unwrap();
        let msgs = MessageTable::uniform(g.slot_count());
        group.throughput(Throughput::Elements(g.slot_count() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &model, |b, m| b.iter(|| lbp_step(m, &msgs)));
    }
    group.finish();
}

fn full(c: &mut Criterion) {
    let (g, labels) = pa_fixture(10_000, 2);
    let model = build_mrf(&g, &labels, MrfParams::default()).unwrap();
    c.bench_function("run_lbp/10000", |b| b.iter(|| run_lbp(&model, &LbpOptions::default())));
}

criterion_group!(benches, step, full);
criterion_main!(benches);
