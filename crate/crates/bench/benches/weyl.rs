use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use weylcoef_core::asymptotics::{asymptotics_row, log_grid};
use weylcoef_core::hamiltonian::trace_reparameterize;
use weylcoef_core::verify::{gen_random_ham, RandomHamSpec};
use weylcoef_core::weyl::{propagate, weyl_coefficient};
use weylcoef_core::HamiltonianModel;

fn q_constant(c: &mut Criterion) {
    let h = HamiltonianModel::constant(1.0, 0.25, 0.5).unwrap();
    c.bench_function("q constant", |b| {
        b.iter(|| weyl_coefficient(black_box(&h), Complex64::new(0.0, 10.0), 1e-8))
    });
}

fn q_random(c: &mut Criterion) {
    let h = gen_random_ham(&RandomHamSpec::new(1));
    c.bench_function("q random piecewise", |b| {
        b.iter(|| weyl_coefficient(black_box(&h), Complex64::new(0.5, 2.0), 1e-8))
    });
}

fn q_power_log(c: &mut Criterion) {
    let h = HamiltonianModel::power_log([1.0, 1.0], [2.0, 0.0]).unwrap();
    let mut g = c.benchmark_group("q power-log");
    g.sample_size(10);
    for y in [1.0, 100.0] {
        g.bench_function(format!("y={y}"), |b| {
            b.iter(|| weyl_coefficient(black_box(&h), Complex64::new(0.0, y), 1e-6))
        });
    }
    g.finish();
}

fn propagate_smooth(c: &mut Criterion) {
    let h = HamiltonianModel::diagonal_power(1.0, 3.0).unwrap();
    c.bench_function("propagate diagonal-power to 4", |b| {
        b.iter(|| propagate(black_box(&h), 4.0, Complex64::new(0.0, 1.0), 1e-10))
    });
}

fn asym_row(c: &mut Criterion) {
    let h = trace_reparameterize(&HamiltonianModel::singular_power(1.0, 3.0).unwrap()).unwrap();
    let grid = log_grid(1.0, 1e4, 5);
    c.bench_function("asymptotics singular-power", |b| {
        b.iter(|| grid.iter().map(|&r| asymptotics_row(black_box(&h), r, 1e-6)).count())
    });
}

criterion_group!(benches, q_constant, q_random, q_power_log, propagate_smooth, asym_row);
criterion_main!(benches);
