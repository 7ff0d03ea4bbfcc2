//! Oracles shared by the integration tests. None of them use the per-mode
//! linear algebra of the solvers: they evaluate fields pointwise and check
//! boundary conditions in Cartesian form.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use screensig_core::mie::{self, FieldExpansion, Side};
use screensig_core::{CVec3, SurfaceTensor, Vec3};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cv(v: &Vec3) -> CVec3 {
    v.map(Complex64::from)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_unit(r: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_c(r: &mut ChaCha8Rng) -> Complex64 {
    c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

/// Random complex vector orthogonal to `d`.
pub fn random_tangent(r: &mut ChaCha8Rng, d: &Vec3) -> CVec3 {
    let p = CVec3::new(random_c(r), random_c(r), random_c(r));
    let dc = cv(d);
    p - dc * dc.dot(&p)
}

pub fn tangential(n: &Vec3, v: &CVec3) -> CVec3 {
    let nc = cv(n);
    v - nc * nc.dot(v)
}

/// Screen residual at one point: `(|E⁺_T − E⁻_T|, |ν×(curl E⁺ − curl E⁻) − iκΣE_T|)`,
/// each relative to the field size at that point.
pub fn screen_residual(e: &FieldExpansion, x: &Vec3, sigma: &SurfaceTensor) -> (f64, f64) {
    let (ep, cp) = mie::boundary_values(e, x, Side::Exterior).unwrap();
    let (em, cm) = mie::boundary_values(e, x, Side::Interior).unwrap();
    let nc = cv(x);
    let et = tangential(x, &em);
    let jump_e = (tangential(x, &ep) - et).norm();
    let lhs = nc.cross(&(cp - cm));
    let rhs = sigma.apply_vec(x, &et) * c(0.0, e.kappa);
    let scale = ep.norm().max(cp.norm()).max(1.0);
    (jump_e / scale, (lhs - rhs).norm() / scale)
}

/// Central-difference curl of `f` at `x`.
pub fn fd_curl(f: impl Fn(&Vec3) -> CVec3, x: &Vec3, h: f64) -> CVec3 {
    let d = |k: usize| {
        let mut e = Vec3::zeros();
        e[k] = h;
        (f(&(x + e)) - f(&(x - e))) / c(2.0 * h, 0.0)
    };
    let (dx, dy, dz) = (d(0), d(1), d(2));
    CVec3::new(dy[2] - dz[1], dz[0] - dx[2], dx[1] - dy[0])
}

pub fn fd_div(f: impl Fn(&Vec3) -> CVec3, x: &Vec3, h: f64) -> Complex64 {
    (0..3)
        .map(|k| {
            let mut e = Vec3::zeros();
            e[k] = h;
            (f(&(x + e))[k] - f(&(x - e))[k]) / (2.0 * h)
        })
        .sum()
}
