use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pkslab_core::{
    init_profile, moment, run, step, verify_kernel_bound, Dimension, InteractionQuadrature,
    ProfileFamily, SolverConfig, SourceStrength,
};

fn config(nu: u32, n_cells: usize) -> SolverConfig {
    SolverConfig {
        dim: Dimension::new(nu).unwrap(),
        z: SourceStrength::ZERO,
        radius: 8.0,
        n_cells,
        stretch: 1.0,
        t_end: 0.05,
        cfl: 0.9,
        dt_min: 1e-12,
        rho_cap: 1e12,
        snapshot_every: 0.01,
    }
}

fn kernel_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_bound_scan");
    for nu in [2, 3, 6] {
        let dim = Dimension::new(nu).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(nu), &dim, |b, &dim| {
            b.iter(|| verify_kernel_bound(dim, 256, 256).unwrap())
        });
    }
    group.finish();
}

fn solver_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver_step");
    for n in [512, 2048] {
        let cfg = config(2, n);
        let rho = init_profile(ProfileFamily::Gaussian { sigma: 1.0 }, 30.0, &cfg).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &rho, |b, rho| {
            b.iter(|| step(black_box(rho), &cfg).unwrap())
        });
    }
    group.finish();
}

fn short_run(c: &mut Criterion) {
    let cfg = config(2, 512);
    let rho = init_profile(ProfileFamily::Gaussian { sigma: 1.0 }, 30.0, &cfg).unwrap();
    c.bench_function("run_512_cells_to_t_0.05", |b| {
        b.iter(|| run(&cfg, black_box(&rho)).unwrap())
    });
}

fn interaction(c: &mut Criterion) {
    let mut group = c.benchmark_group("interaction_integral");
    for nu in [2, 3] {
        let cfg = config(nu, 256);
        let rho = init_profile(ProfileFamily::Gaussian { sigma: 1.0 }, 30.0, &cfg).unwrap();
        let quad = InteractionQuadrature::new(cfg.dim, 16).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(nu), &rho, |b, rho| {
            b.iter(|| quad.interaction_integral(black_box(rho)).unwrap())
        });
    }
    group.finish();
    c.bench_function("interaction_table_nu3", |b| {
        b.iter(|| InteractionQuadrature::new(Dimension::new(3).unwrap(), 16).unwrap())
    });
}

fn moments(c: &mut Criterion) {
    let cfg = config(3, 2048);
    let rho = init_profile(ProfileFamily::Gaussian { sigma: 1.0 }, 30.0, &cfg).unwrap();
    c.bench_function("moment_nu3_2048_cells", |b| {
        b.iter(|| moment(black_box(&rho), 3.0).unwrap())
    });
}

criterion_group!(
    benches,
    kernel_scan,
    solver_step,
    short_run,
    interaction,
    moments
);
criterion_main!(benches);
