use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use entangle_bench::reference_fixture;
use entangle_core::dynamics::{assemble_hamiltonian, propagate_forward};
use entangle_core::linalg::{herm_eig, propagator};
use entangle_core::pmp::{forward_backward_sweep, SolverConfig};

fn linalg(c: &mut Criterion) {
    let (_, hs, _) = reference_fixture(1.0, 1000);
    let h = assemble_hamiltonian(&hs, &[1.0, -1.0, -1.0]).unwrap();
    c.bench_function("herm_eig_4x4", |b| b.iter(|| herm_eig(black_box(&h)).unwrap()));
    c.bench_function("propagator_4x4", |b| {
        b.iter(|| propagator(black_box(&h), 1e-3).unwrap())
    });
}

fn dynamics(c: &mut Criterion) {
    let (rho0, hs, sched) = reference_fixture(1.0, 1000);
    c.bench_function("propagate_forward_1000", |b| {
        b.iter(|| propagate_forward(black_box(&rho0), &hs, &sched).unwrap())
    });
}

fn sweep(c: &mut Criterion) {
    let (rho0, hs, sched) = reference_fixture(0.6, 1000);
    let cfg = SolverConfig {
        max_sweeps: 20,
        ..SolverConfig::default()
    };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("forward_backward_sweep_20", |b| {
        b.iter(|| forward_backward_sweep(black_box(&rho0), &hs, 0.6, &cfg, &sched).unwrap())
    });
    group.finish();
}

criterion_group!(benches, linalg, dynamics, sweep);
criterion_main!(benches);
