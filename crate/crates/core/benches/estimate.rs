use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use manip_core::{estimate_share_with, EstimateOptions, Execution, Mode, NamedRule, ScoringRule};

const SAMPLES: u64 = 200_000;

fn bench_estimate(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_share");
    group.sample_size(10);
    group.throughput(Throughput::Elements(SAMPLES));
    for (rule, m) in [(NamedRule::Plurality, 3), (NamedRule::Borda, 4), (NamedRule::Antiplurality, 5)] {
        let scoring = ScoringRule::named(rule, m).unwrap();
        for (label, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let opts = EstimateOptions { mode: Mode::Relabel, cap: None, execution };
            group.bench_with_input(BenchmarkId::new(label, format!("{rule}-m{m}")), &opts, |b, opts| {
                b.iter(|| estimate_share_with(&scoring, SAMPLES, 1, opts).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_estimate);
criterion_main!(benches);
