use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use hanle_bench::{elliptical_one_to_two, tilted_three_to_four};
use hanle_core::doppler::averaged_scan;
use hanle_core::gobe::steady_state;
use hanle_core::lineshape::{fit_samples, sign_reversal_gamma1};
use hanle_core::reduced::{reduced_numeric, ReducedSystem};
use hanle_core::scan::{linspace, scan_omega};
use hanle_core::{DopplerParams, Polarization, SolverPath, SystemParams};

fn full_equations(c: &mut Criterion) {
    let small = elliptical_one_to_two();
    let large = tilted_three_to_four();
    c.bench_function("steady_state 1->2", |b| b.iter(|| steady_state(black_box(&small)).unwrap()));
    c.bench_function("steady_state 3->4 tilted", |b| b.iter(|| steady_state(black_box(&large)).unwrap()));
}

fn reduced(c: &mut Criterion) {
    let p = elliptical_one_to_two();
    c.bench_function("reduced_numeric", |b| b.iter(|| reduced_numeric(black_box(&p)).unwrap()));
    let rs = ReducedSystem::new(&p).unwrap();
    c.bench_function("reduced pi_e, prebuilt", |b| {
        b.iter(|| rs.pi_e(p.kappa, black_box(p.delta_v), p.gamma_eg, p.omega_g).unwrap())
    });
}

fn lineshape(c: &mut Criterion) {
    let p = elliptical_one_to_two();
    let unit = p.gamma_eg * p.saturation();
    let x = linspace(-10.0, 10.0, 201);
    let grid: Vec<f64> = x.iter().map(|o| o * unit).collect();
    let y = scan_omega(&p, SolverPath::Reduced, &grid, true).unwrap().signal;
    c.bench_function("fit 201 samples", |b| b.iter(|| fit_samples(black_box(&x), &y).unwrap()));
    c.bench_function("sign_reversal_gamma1", |b| {
        b.iter(|| sign_reversal_gamma1(black_box(PI / 8.0), 1.0).unwrap())
    });
}

fn doppler(c: &mut Criterion) {
    let mut p = SystemParams::one_to_two();
    p.gamma_transit = 0.001;
    p.gamma_eg = 0.501;
    p.kappa = 0.2;
    p.pol = Polarization::new(PI / 10.0).unwrap();
    let grid = linspace(-0.1, 0.1, 41);
    let dp = DopplerParams::new(20.0);
    let mut group = c.benchmark_group("doppler");
    group.sample_size(10);
    group.bench_function("averaged_scan 41 points", |b| {
        b.iter(|| averaged_scan(&p, &dp, black_box(&grid), true).unwrap())
    });
    group.finish();
}

criterion_group!(benches, full_equations, reduced, lineshape, doppler);
criterion_main!(benches);
