//! Criterion benches comparing the rayon-parallel ensemble path against
//! the sequential fallback, plus solver-kernel throughput.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use hydrochain::experiments::{run_ensemble, run_ensemble_serial};
use hydrochain::micro::{SamplePlan, SimConfig};
use hydrochain::pde::{self, equilibrium_state, PdeConfig};
use hydrochain::rng::StreamFactory;
use hydrochain::{Potential, TensionProtocol, ThermoTable};

fn bench_ensemble(c: &mut Criterion) {
    let protocol = TensionProtocol::new(0.0, 1.0, 1.0).unwrap();
    let cfg = SimConfig::new(64, 1.0, 1.0, 1.0, protocol, Potential::Harmonic).unwrap();
    let streams = StreamFactory::new(7);
    let plan = SamplePlan::uniform(0.02, 1);
    let realizations = 16;

    let mut group = c.benchmark_group("micro_ensemble");
    group.sample_size(10);
    group.bench_with_input(
        BenchmarkId::new("parallel", realizations),
        &realizations,
        |b, &r| {
            b.iter(|| black_box(run_ensemble(&cfg, &streams, 0, r, &plan).unwrap()));
        },
    );
    group.bench_with_input(
        BenchmarkId::new("serial", realizations),
        &realizations,
        |b, &r| {
            b.iter(|| black_box(run_ensemble_serial(&cfg, &streams, 0, r, &plan).unwrap()));
        },
    );
    group.finish();
}

fn bench_pde(c: &mut Criterion) {
    let table = ThermoTable::new(Potential::CosinePerturbed { amplitude: 0.5 }, 1.0).unwrap();
    let protocol = TensionProtocol::new(0.0, 1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("pde_solve");
    group.sample_size(10);
    for m in [64usize, 128] {
        group.bench_with_input(BenchmarkId::new("rp_system", m), &m, |b, &m| {
            let cfg = PdeConfig::new(m, 1.0, 1.0, protocol);
            b.iter(|| {
                let init = equilibrium_state(m, &protocol, &table);
                black_box(pde::integrate(init, &cfg, &table, 0.05, &[]).unwrap())
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_ensemble, bench_pde);
criterion_main!(benches);
