use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use dyntcp::correlation::{build_tables, WindowConfig};
use dyntcp::replay::replay;
use dyntcp::schedulers::schedule_worst;
use dyntcp::{
    apfd, is_evaluable, run_dynamic, CpConfig, ExecutionTrace, ReplayConfig, StaticChoice,
};
use dyntcp_bench::grouped_dataset;

fn tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_tables");
    for tests in [50, 200, 1000] {
        let dataset = grouped_dataset(tests, 40, 1);
        let target = dataset.cycles().last().unwrap().cycle;
        let history = dataset.history_before(target);
        group.bench_with_input(BenchmarkId::from_parameter(tests), &tests, |b, _| {
            b.iter(|| build_tables(black_box(history), target, WindowConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn dynamic(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_dynamic");
    for tests in [50, 200, 1000] {
        let dataset = grouped_dataset(tests, 60, 2);
        let log = dataset
            .cycles()
            .iter()
            .rev()
            .find(|l| is_evaluable(l))
            .unwrap();
        let table = build_tables(
            dataset.history_before(log.cycle),
            log.cycle,
            WindowConfig::default(),
        )
        .unwrap();
        let schedule = schedule_worst(log).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(tests), &tests, |b, _| {
            b.iter(|| run_dynamic(black_box(&schedule), log, &table, CpConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn metric(c: &mut Criterion) {
    let dataset = grouped_dataset(1000, 20, 3);
    let log = dataset.cycles().iter().find(|l| is_evaluable(l)).unwrap();
    let trace = ExecutionTrace::from_schedule(&schedule_worst(log).unwrap(), log).unwrap();
    c.bench_function("apfd/1000", |b| b.iter(|| apfd(black_box(&trace)).unwrap()));
}

fn full_replay(c: &mut Criterion) {
    let dataset = grouped_dataset(50, 300, 4);
    let mut group = c.benchmark_group("replay");
    group.sample_size(10);
    for choice in [StaticChoice::Worst, StaticChoice::Random] {
        let cfg = ReplayConfig {
            static_choice: choice,
            ..ReplayConfig::default()
        };
        group.bench_function(cfg.static_label(), |b| {
            b.iter(|| replay(black_box(&dataset), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, tables, dynamic, metric, full_replay);
criterion_main!(benches);
