use criterion::{black_box, criterion_group, criterion_main, Criterion};
use landau_bench::{gaussian_profile, power_profile, Fixture, THETA};
use landau_core::fgr::fgr_value;
use landau_core::operators::assemble;
use landau_core::resonance::find_eigenvalue_near;
use landau_core::schrodinger1d::{bound_states_with, jost_solutions};
use landau_core::toeplitz::{toeplitz_eigenvalue, toeplitz_eigenvalues};
use landau_core::{Complex64, Grid1D, Potential1D, Stencil};

fn longitudinal(c: &mut Criterion) {
    let grid = Grid1D::symmetric(30.0, 0.1).unwrap();
    let well = Potential1D::poschl_teller();
    c.bench_function("bound_states_8th_order", |b| {
        b.iter(|| bound_states_with(black_box(&well), &grid, Stencil::Eighth).unwrap())
    });
    let fine = Grid1D::symmetric(20.0, 0.05).unwrap();
    c.bench_function("jost_k1", |b| b.iter(|| jost_solutions(&well, black_box(1.0), &fine).unwrap()));
}

fn operators(c: &mut Criterion) {
    let f = Fixture::reference();
    c.bench_function("assemble_reference", |b| {
        b.iter(|| assemble(&f.problem, &f.basis, THETA, black_box(0.04)).unwrap())
    });
    c.bench_function("inverse_iteration_reference", |b| {
        b.iter(|| find_eigenvalue_near(&f.operator, Complex64::new(f.level, 0.0), 1e-10).unwrap())
    });
    let mut slow = c.benchmark_group("slow");
    slow.sample_size(10);
    slow.bench_function("fgr_reference", |b| b.iter(|| fgr_value(&f.problem, &f.basis, 1).unwrap()));
    slow.finish();
}

fn toeplitz(c: &mut Criterion) {
    let g = gaussian_profile();
    let p = power_profile();
    c.bench_function("toeplitz_gaussian_m60", |b| b.iter(|| toeplitz_eigenvalues(&g, 0, black_box(60)).unwrap()));
    c.bench_function("toeplitz_power_single_m1000", |b| {
        b.iter(|| toeplitz_eigenvalue(&p, 0, black_box(1000)).unwrap())
    });
}

criterion_group!(benches, longitudinal, operators, toeplitz);
criterion_main!(benches);
