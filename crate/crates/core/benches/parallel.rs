use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use madelung_core::consistency::{default_probes, q1_field, MuModel};
use madelung_core::{evolve, sample_gaussian, DofParams, Execution, GridSpec, PotentialSpec, SimulationParams};

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn gateaux(c: &mut Criterion) {
    let grid = GridSpec::uniform_1d(-8.0, 8.0, 128).unwrap();
    let rho = default_probes(&grid).remove(0).rho;
    let mu = MuModel::family(0.25, 0.0, 0.0).unwrap();
    let mut group = c.benchmark_group("q1_128");
    for (name, exec) in modes() {
        group.bench_function(name, |b| b.iter(|| q1_field(&mu, black_box(&rho), &grid, exec).unwrap()));
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let grid = GridSpec::uniform_1d(-10.0, 10.0, 256).unwrap();
    let state = sample_gaussian(&grid, &[0.0], &[1.0], &[1.0]).unwrap();
    let base = SimulationParams::new(vec![DofParams::quantum(1.0)], PotentialSpec::Free, 1e-3);
    let lambdas: Vec<f64> = (0..8).map(|i| i as f64 * 0.125).collect();
    let mut group = c.benchmark_group("sweep_8x200");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_function(name, |b| {
            b.iter(|| {
                exec.map_slice(&lambdas, |&l| {
                    evolve(&state, &grid, &base.clone().with_lambda(l), 200, 200)
                        .map(|e| e.reports.last().map(|r| r.energy))
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, gateaux, sweep);
criterion_main!(benches);
