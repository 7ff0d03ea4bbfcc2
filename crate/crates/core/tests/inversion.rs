mod common;

use common::*;
use num_complex::Complex64;
use rand::Rng;
use screensig_core::eigs::{eigenvalues_in_window, Window};
use screensig_core::farfield::{self, LambdaAssembler, NoiseSpec};
use screensig_core::grid::{build_grid, GridKind};
use screensig_core::inversion::{
    self, detect_peaks, lambda_grid, normal_equation_defect, scan_indicator, ProbeSet, RegularizationPolicy, TikhonovFactor,
};
use screensig_core::{CMatrix, SurfaceTensor};

const KAPPA: f64 = 1.9;
const NMAX: usize = 17;

fn random_matrix(seed: u64, n: usize) -> CMatrix {
    let mut r = rng(seed);
    CMatrix::from_fn(n, n, |_, _| random_c(&mut r))
}

fn random_vector(seed: u64, n: usize) -> inversion::CVector {
    let mut r = rng(seed);
    inversion::CVector::from_fn(n, |_, _| random_c(&mut r))
}

#[test]
fn tikhonov_solution_satisfies_normal_equations() {
    for seed in 0..5 {
        let m = random_matrix(seed, 40);
        let b = random_vector(100 + seed, 40);
        for alpha in [1e-6, 1e-3, 1.0] {
            let (g, res) = inversion::tikhonov_solve(&m, &b, alpha).unwrap();
            assert!(normal_equation_defect(&m, &g, &b, alpha) < 1e-8);
            assert!((res - (&m * &g - &b).norm()).abs() < 1e-8 * b.norm());
        }
    }
}

#[test]
fn solution_norm_and_residual_are_monotone_in_alpha() {
    let mut m = random_matrix(3, 40);
    // graded singular values like a compact operator
    let svd = m.clone().svd(true, true);
    let sv = nalgebra::DVector::from_fn(40, |i, _| Complex64::from(10f64.powf(-(i as f64) / 4.0)));
    m = svd.u.unwrap() * CMatrix::from_diagonal(&sv) * svd.v_t.unwrap();
    let b = random_vector(7, 40);
    let f = TikhonovFactor::new(&m).unwrap();
    let mut last: Option<(f64, f64)> = None;
    for k in 0..=60 {
        let alpha = 10f64.powf(-8.0 + 6.0 * k as f64 / 60.0);
        let (g, r) = f.solve(&b, alpha).unwrap();
        if let Some((gn, rn)) = last {
            assert!(g.norm() <= gn * (1.0 + 1e-12), "norm grew at alpha {alpha:e}");
            assert!(r >= rn * (1.0 - 1e-12), "residual shrank at alpha {alpha:e}");
        }
        last = Some((g.norm(), r));
    }
}

#[test]
fn morozov_hits_the_discrepancy() {
    let m = random_matrix(9, 30);
    let b = random_vector(10, 30);
    let f = TikhonovFactor::new(&(&m * CMatrix::from_diagonal_element(30, 30, Complex64::from(0.1)))).unwrap();
    let policy = RegularizationPolicy::Morozov { tau: 1.5, noise_level: 0.01, rho: 1e-6 };
    let alpha = policy.alpha(&f, &b);
    let r = f.residual_for(&b, alpha);
    assert!((r - 1.5 * 0.01 * b.norm()).abs() < 1e-8 * b.norm(), "{r}");
    let fallback = RegularizationPolicy::Morozov { tau: 1.5, noise_level: 0.0, rho: 1e-6 };
    assert_eq!(fallback.alpha(&f, &b), 1e-6 * f.sigma_max().powi(2));
}

fn setup(noise: f64) -> (farfield::FarFieldMatrix, LambdaAssembler, SurfaceTensor) {
    let sigma = SurfaceTensor::new(c(0.0, 0.5), c(0.0, 0.0));
    let grid = build_grid(96, GridKind::ProductGauss).unwrap();
    let f = farfield::assemble_f(&sigma, KAPPA, &grid, NMAX).unwrap();
    let f = farfield::add_noise(&f, &NoiseSpec::new(noise, 1).unwrap()).unwrap();
    (f, LambdaAssembler::new(KAPPA, &grid, NMAX).unwrap(), sigma)
}

#[test]
fn indicator_does_not_depend_on_probe_order() {
    let (f, asm, _) = setup(0.0015);
    let probes = ProbeSet::random(6, 0.9, 4).unwrap();
    let mut shuffled = probes.points.clone();
    let mut r = rng(2);
    for i in (1..shuffled.len()).rev() {
        shuffled.swap(i, r.random_range(0..=i));
    }
    let other = ProbeSet::from_points(shuffled, 0.9, 4);
    let lambdas = lambda_grid(-0.5, 1.0, 7, 0.0).unwrap();
    let policy = RegularizationPolicy::default();
    let a = scan_indicator(&f, &lambdas, &probes, &asm, None, &policy).unwrap();
    let b = scan_indicator(&f, &lambdas, &other, &asm, None, &policy).unwrap();
    for (x, y) in a.indicator.iter().zip(&b.indicator) {
        assert!((x - y).abs() < 1e-12 * x, "{x} vs {y}");
    }
}

#[test]
fn cached_scan_matches_uncached_scan() {
    let (f, asm, _) = setup(0.0);
    let dir = tempfile::tempdir().unwrap();
    let cache = farfield::LambdaCache::new(dir.path());
    let probes = ProbeSet::random(3, 0.9, 1).unwrap();
    let lambdas = lambda_grid(-0.5, 1.0, 4, 0.0).unwrap();
    let policy = RegularizationPolicy::default();
    let a = scan_indicator(&f, &lambdas, &probes, &asm, None, &policy).unwrap();
    let b = scan_indicator(&f, &lambdas, &probes, &asm, Some(&cache), &policy).unwrap();
    let c2 = scan_indicator(&f, &lambdas, &probes, &asm, Some(&cache), &policy).unwrap();
    assert_eq!(a.indicator, b.indicator);
    assert_eq!(b.indicator, c2.indicator);
}

#[test]
fn indicator_is_smooth_away_from_eigenvalues() {
    let (f, asm, sigma) = setup(0.0);
    let probes = ProbeSet::random(5, 0.9, 3).unwrap();
    let lambdas = lambda_grid(-0.5, 1.0, 31, 0.0).unwrap();
    let w = Window::real(-0.5, 1.0).unwrap();
    assert!(eigenvalues_in_window(KAPPA, &sigma, &w, 40).unwrap().eigenvalues.is_empty());
    let curve = scan_indicator(&f, &lambdas, &probes, &asm, None, &RegularizationPolicy::default()).unwrap();
    assert!(curve.valid.iter().all(|&v| v));
    let x = &curve.indicator;
    for i in 1..x.len() - 1 {
        let second = (x[i + 1] - 2.0 * x[i] + x[i - 1]).abs();
        assert!(second < 0.05 * x[i], "kink at {}", curve.lambdas[i]);
    }
}

#[test]
fn peak_appears_at_the_lowest_eigenvalue() {
    let (f, asm, sigma) = setup(0.0015);
    let probes = ProbeSet::random(15, 0.9, 2).unwrap();
    let lambdas = lambda_grid(-2.6, -1.7, 91, 0.0).unwrap();
    let step = 0.01;
    let w = Window::real(-2.6, -1.7).unwrap();
    let eigs = eigenvalues_in_window(KAPPA, &sigma, &w, 40).unwrap();
    assert_eq!(eigs.eigenvalues.len(), 1);
    let target = eigs.eigenvalues[0].lambda.re;
    let curve = scan_indicator(&f, &lambdas, &probes, &asm, None, &RegularizationPolicy::default()).unwrap();
    let peaks = detect_peaks(&curve, 2.0);
    assert_eq!(peaks.locations.len(), 1, "{:?}", peaks.locations);
    assert!((peaks.locations[0].re - target).abs() <= 2.0 * step + 1e-12);
}
