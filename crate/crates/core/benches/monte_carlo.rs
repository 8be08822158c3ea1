//! Parallel against sequential evaluation of the same experiments.
//!
//! Build with `--no-default-features` to time the sequential fallback alone.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use puncture_core::simulator::{run_block_loss, run_cell, run_pair, CellConfig, Execution, LossConfig, PairConfig};
use puncture_core::Mapper;

fn modes() -> [(&'static str, Execution); 2] {
    [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)]
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("pair_sweep");
    group.sample_size(10);
    for (name, execution) in modes() {
        let mut cfg = PairConfig::new(2, 16, Mapper::Esrm);
        cfg.sttis = 200;
        cfg.execution = execution;
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| run_pair(cfg).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("block_loss");
    group.sample_size(10);
    for (name, execution) in modes() {
        let cfg = LossConfig {
            k_grid: vec![1200],
            trials: 2000,
            execution,
            ..LossConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| run_block_loss(cfg).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("cell");
    group.sample_size(10);
    for (name, execution) in modes() {
        let cfg = CellConfig {
            power_dbm: vec![10.0, 30.0],
            coherence_windows: 16,
            execution,
            ..CellConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| run_cell(cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo);
criterion_main!(benches);
