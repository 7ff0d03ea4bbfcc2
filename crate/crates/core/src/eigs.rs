//! Σ-Steklov eigenvalues of the unit ball: `ν × curl w + iκ Σ w_T = λ S w_T`.
//!
//! With `w = α M_nm + β N_nm` (regular modes) the X and U components of the
//! boundary condition give a 2×2 pencil `(A − λB)(α, β)ᵀ = 0`, where only the
//! TE trace `α j_n(κ)` survives `S`, so `B = diag(j_n(κ), 0)` and
//! `det(A − λB) = det A − λ j_n A₁₁` is linear in `λ`. Every root has
//! multiplicity `2n + 1` (the pencil does not depend on `m`).

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::specfun::riccati_pairs_j;
use crate::tensor::SurfaceTensor;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const DEGENERACY_TOL: f64 = 1e-13;

/// Region of the λ plane; `im: None` accepts any imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im: Option<(f64, f64)>,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im: Option<(f64, f64)>) -> Result<Self> {
        let finite = re_min.is_finite() && re_max.is_finite() && im.is_none_or(|(a, b)| a.is_finite() && b.is_finite());
        if !finite || re_min > re_max || im.is_some_and(|(a, b)| a > b) {
            return Err(Error::InvalidInput("window must be a bounded, nonempty rectangle".into()));
        }
        Ok(Self { re_min, re_max, im })
    }

    /// Strip `re_min ≤ Re λ ≤ re_max`.
    pub fn real(re_min: f64, re_max: f64) -> Result<Self> {
        Self::new(re_min, re_max, None)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && self.im.is_none_or(|(a, b)| z.im >= a && z.im <= b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenFamily {
    TE,
    TM,
    /// TE/TM mixed by the rotation part of Σ.
    Coupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub lambda: Complex64,
    pub n: usize,
    pub family: EigenFamily,
    pub multiplicity: usize,
    /// `(α, β)`: coefficients of the regular TE and TM modes.
    pub vector: [Complex64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueSet {
    pub eigenvalues: Vec<Eigenvalue>,
    pub window: Window,
    pub kappa: f64,
    pub sigma: SurfaceTensor,
    pub nmax: usize,
    /// Degrees where the boundary condition holds for every λ.
    pub degenerate: Vec<usize>,
}

impl EigenvalueSet {
    pub fn lambdas(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|e| e.lambda).collect()
    }
}

/// `(A, B)` for degree `n`; rows are the X and U components, columns `(α, β)`.
pub fn mode_pencil(n: usize, kappa: f64, sigma: &SurfaceTensor) -> Result<(Matrix2<Complex64>, Matrix2<Complex64>)> {
    if n == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidInput(format!("wave number must be positive, got {kappa}")));
    }
    let j = riccati_pairs_j(n, kappa)?;
    let (jz, jd) = (j[n].value, j[n].derivative_term);
    if jz.norm() < DEGENERACY_TOL * jd.norm() {
        return Err(Error::InteriorResonance { n });
    }
    let (a, b) = (sigma.a, sigma.b);
    let k = Complex64::from(kappa);
    let pencil_a = Matrix2::new(
        -k * jd + I * k * a * jz,
        -I * k * b * jd,
        -I * k * b * jz,
        -k * jz - I * k * a * jd,
    );
    let pencil_b = Matrix2::new(jz, ZERO, ZERO, ZERO);
    Ok((pencil_a, pencil_b))
}

/// Root of the linear pencil of degree `n`; `Ok(None)` if there is none.
pub fn mode_eigenvalue(n: usize, kappa: f64, sigma: &SurfaceTensor) -> Result<Option<Eigenvalue>> {
    let (a, b) = mode_pencil(n, kappa, sigma)?;
    let det = a.determinant();
    let slope = b[(0, 0)] * a[(1, 1)];
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(b[(0, 0)].norm());
    if slope.norm() < DEGENERACY_TOL * scale * scale {
        if det.norm() < DEGENERACY_TOL * scale * scale {
            return Err(Error::DegenerateMode { n });
        }
        return Ok(None);
    }
    let lambda = det / slope;
    let m = a - b * lambda;
    // null vector from the row of larger norm
    let r = if m.row(0).norm() >= m.row(1).norm() { 0 } else { 1 };
    let v = Vector2::new(-m[(r, 1)], m[(r, 0)]);
    let v = if v.norm() == 0.0 { Vector2::new(Complex64::from(1.0), ZERO) } else { v / Complex64::from(v.norm()) };
    let family = if sigma.b == ZERO { EigenFamily::TE } else { EigenFamily::Coupled };
    Ok(Some(Eigenvalue { lambda, n, family, multiplicity: 2 * n + 1, vector: [v[0], v[1]] }))
}

pub fn eigenvalues_in_window(kappa: f64, sigma: &SurfaceTensor, window: &Window, nmax: usize) -> Result<EigenvalueSet> {
    let per_n: Vec<Result<Option<Eigenvalue>>> = (1..=nmax).into_par_iter().map(|n| mode_eigenvalue(n, kappa, sigma)).collect();
    let mut eigenvalues = Vec::new();
    let mut degenerate = Vec::new();
    for (n, r) in (1..=nmax).zip(per_n) {
        match r {
            Ok(Some(e)) if window.contains(e.lambda) => eigenvalues.push(e),
            Ok(_) => {}
            Err(Error::DegenerateMode { .. }) => {
                log::warn!("degree {n}: boundary condition satisfied for every lambda");
                degenerate.push(n);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(EigenvalueSet { eigenvalues, window: *window, kappa, sigma: *sigma, nmax, degenerate })
}

/// True if raising the truncation by `extra` adds no eigenvalue to the window.
pub fn tail_stable(kappa: f64, sigma: &SurfaceTensor, window: &Window, nmax: usize, extra: usize) -> Result<bool> {
    let a = eigenvalues_in_window(kappa, sigma, window, nmax)?;
    let b = eigenvalues_in_window(kappa, sigma, window, nmax + extra)?;
    Ok(a.eigenvalues.len() == b.eigenvalues.len())
}

/// Eigenvalues in the window for each parameter value of a tensor family.
pub fn eigenvalue_trace(
    kappa: f64,
    family: impl Fn(f64) -> SurfaceTensor + Sync,
    parameters: &[f64],
    window: &Window,
    nmax: usize,
) -> Result<Vec<(f64, EigenvalueSet)>> {
    parameters
        .par_iter()
        .map(|&s| Ok((s, eigenvalues_in_window(kappa, &family(s), window, nmax)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symmetric_tensor_gives_diagonal_pencil() {
        for n in 1..6 {
            let (a, b) = mode_pencil(n, 1.9, &SurfaceTensor::new(c(0.0, 0.5), ZERO)).unwrap();
            assert_eq!(a[(0, 1)], ZERO);
            assert_eq!(a[(1, 0)], ZERO);
            assert_eq!(b.rank(1e-300), 1);
        }
    }

    #[test]
    fn b_has_rank_one() {
        for n in 1..20 {
            let (_, b) = mode_pencil(n, 1.9, &SurfaceTensor::new(c(0.3, 0.2), c(0.1, 0.0))).unwrap();
            assert_eq!(b.rank(0.0), 1);
        }
    }

    #[test]
    fn lossless_eigenvalues_are_real() {
        let w = Window::real(-1e6, 1e6).unwrap();
        let s = eigenvalues_in_window(1.9, &SurfaceTensor::new(c(0.0, 0.5), ZERO), &w, 30).unwrap();
        assert_eq!(s.eigenvalues.len(), 30);
        for e in &s.eigenvalues {
            assert!(e.lambda.im.abs() < 1e-12, "{}", e.lambda);
            assert_eq!(e.multiplicity, 2 * e.n + 1);
            assert_eq!(e.family, EigenFamily::TE);
        }
    }

    #[test]
    fn closed_form_for_symmetric_tensor() {
        let a = c(0.0, 0.5);
        let kappa = 1.9;
        let j = riccati_pairs_j(3, kappa).unwrap();
        let e = mode_eigenvalue(3, kappa, &SurfaceTensor::new(a, ZERO)).unwrap().unwrap();
        let expected = -j[3].derivative_term * kappa / j[3].value + I * kappa * a;
        assert!((e.lambda - expected).norm() < 1e-13);
    }

    #[test]
    fn transpose_invariance() {
        let s = SurfaceTensor::new(c(0.0, 0.3), c(0.1, 0.0));
        let w = Window::real(-50.0, 50.0).unwrap();
        let a = eigenvalues_in_window(1.9, &s, &w, 20).unwrap().lambdas();
        let b = eigenvalues_in_window(1.9, &s.transpose(), &w, 20).unwrap().lambdas();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_family_trace_rows_match() {
        let w = Window::real(-10.0, 10.0).unwrap();
        let rows = eigenvalue_trace(1.9, |_| SurfaceTensor::new(c(0.0, 0.5), ZERO), &[0.0, 0.5, 1.0], &w, 20).unwrap();
        assert_eq!(rows[0].1.eigenvalues, rows[1].1.eigenvalues);
        assert_eq!(rows[1].1.eigenvalues, rows[2].1.eigenvalues);
    }

    #[test]
    fn window_validation() {
        assert!(Window::real(1.0, 0.0).is_err());
        assert!(Window::new(0.0, 1.0, Some((1.0, 0.0))).is_err());
        assert!(Window::real(f64::NEG_INFINITY, 0.0).is_err());
    }
}
