use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use screensig_core::eigs::{eigenvalues_in_window, Window};
use screensig_core::farfield::{assemble_f, LambdaAssembler};
use screensig_core::grid::{build_grid, GridKind};
use screensig_core::inversion::{probe_average, probe_rhs, ProbeSet, RegularizationPolicy};
use screensig_core::specfun::{riccati_pairs_h, vsh_all};
use screensig_core::{SurfaceTensor, Vec3};

const KAPPA: f64 = 1.9;
const NMAX: usize = 17;

fn sigma() -> SurfaceTensor {
    SurfaceTensor::new(Complex64::new(0.0, 0.5), Complex64::new(0.0, 0.0))
}

fn special_functions(c: &mut Criterion) {
    let d = Vec3::new(0.3, -0.4, 0.5).normalize();
    c.bench_function("vsh_all n=17", |b| b.iter(|| vsh_all(black_box(NMAX), &d).unwrap()));
    c.bench_function("riccati_pairs_h n=40", |b| b.iter(|| riccati_pairs_h(black_box(40), KAPPA).unwrap()));
}

fn operators(c: &mut Criterion) {
    let grid = build_grid(96, GridKind::ProductGauss).unwrap();
    c.bench_function("assemble_f 96 dirs", |b| b.iter(|| assemble_f(&sigma(), KAPPA, &grid, NMAX).unwrap()));
    let asm = LambdaAssembler::new(KAPPA, &grid, NMAX).unwrap();
    c.bench_function("assemble_f_lambda 96 dirs", |b| b.iter(|| asm.assemble(black_box(Complex64::new(0.25, 0.0))).unwrap()));
}

fn scan_step(c: &mut Criterion) {
    let grid = build_grid(96, GridKind::ProductGauss).unwrap();
    let f = assemble_f(&sigma(), KAPPA, &grid, NMAX).unwrap();
    let asm = LambdaAssembler::new(KAPPA, &grid, NMAX).unwrap();
    let fl = asm.assemble(Complex64::new(0.25, 0.0)).unwrap();
    let m = &f.entries - &fl.entries;
    let rhs = probe_rhs(&f, &ProbeSet::random(15, 0.9, 2).unwrap());
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    group.bench_function("one lambda, 45 solves", |b| {
        b.iter(|| probe_average(&m, &rhs, &RegularizationPolicy::default()).unwrap())
    });
    group.finish();
}

fn eigenvalues(c: &mut Criterion) {
    let w = Window::real(-50.0, 50.0).unwrap();
    c.bench_function("eigenvalues n<=40", |b| b.iter(|| eigenvalues_in_window(KAPPA, &sigma(), &w, black_box(40)).unwrap()));
}

criterion_group!(benches, special_functions, operators, scan_step, eigenvalues);
criterion_main!(benches);
