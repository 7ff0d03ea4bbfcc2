//! Surface conductivity tensors and their admissibility checks.
//!
//! Matrices act on frame coefficients `ξ = (α, β)` of a tangential vector
//! `α t₁ + β t₂` in the usual column convention, `Σξ = (σ11 α + σ12 β, σ21 α + σ22 β)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::{Result, Vec3};

pub const DEFAULT_THETA_SAMPLES: usize = 181;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralTensor2 {
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
}

/// Rotation-class tensor `Σξ = a ξ + b (ν × ξ)`, constant over the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceTensor {
    pub a: Complex64,
    pub b: Complex64,
}

impl GeneralTensor2 {
    pub fn new(s11: Complex64, s12: Complex64, s21: Complex64, s22: Complex64) -> Self {
        Self { s11, s12, s21, s22 }
    }

    pub fn scalar(a: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::new(a, z, z, a)
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.s11, self.s21, self.s12, self.s22)
    }

    /// `Σ^H`
    pub fn adjoint(&self) -> Self {
        Self::new(self.s11.conj(), self.s21.conj(), self.s12.conj(), self.s22.conj())
    }

    pub fn apply(&self, xi: [Complex64; 2]) -> [Complex64; 2] {
        [self.s11 * xi[0] + self.s12 * xi[1], self.s21 * xi[0] + self.s22 * xi[1]]
    }

    fn is_finite(&self) -> bool {
        [self.s11, self.s12, self.s21, self.s22].iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl SurfaceTensor {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        Self { a, b }
    }

    pub fn zero() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, -self.b)
    }

    pub fn is_zero(&self) -> bool {
        self.a == Complex64::new(0.0, 0.0) && self.b == Complex64::new(0.0, 0.0)
    }

    /// Frame matrix in a right-handed tangential frame (`ν × t₁ = t₂`).
    pub fn to_general(&self) -> GeneralTensor2 {
        GeneralTensor2::new(self.a, -self.b, self.b, self.a)
    }

    /// Applies Σ to a tangential 3-vector at the point with unit normal `normal`.
    pub fn apply_vec(&self, normal: &Vec3, v: &crate::CVec3) -> crate::CVec3 {
        let nu = crate::cvec(normal);
        v * self.a + nu.cross(v) * self.b
    }
}

/// `ξ̄ᵀ Σ ξ = |α|²σ11 + ᾱβσ12 + β̄ασ21 + |β|²σ22`.
pub fn quadratic_form(t: &GeneralTensor2, xi: [Complex64; 2]) -> Complex64 {
    let (a, b) = (xi[0], xi[1]);
    t.s11 * a.norm_sqr() + a.conj() * b * t.s12 + b.conj() * a * t.s21 + t.s22 * b.norm_sqr()
}

/// Which of the three passivity inequalities hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessDetail {
    pub re_s11_nonnegative: bool,
    pub re_s22_nonnegative: bool,
    pub determinant_bound: bool,
}

impl UniquenessDetail {
    pub fn ok(&self) -> bool {
        self.re_s11_nonnegative && self.re_s22_nonnegative && self.determinant_bound
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.re_s11_nonnegative {
            out.push("Re(s11) >= 0".to_string());
        }
        if !self.re_s22_nonnegative {
            out.push("Re(s22) >= 0".to_string());
        }
        if !self.determinant_bound {
            out.push("Re(s11) Re(s22) >= |s12 + conj(s21)|^2 / 4".to_string());
        }
        out
    }
}

fn tolerance(t: &GeneralTensor2) -> f64 {
    let scale = [t.s11, t.s12, t.s21, t.s22].iter().map(|z| z.norm()).fold(0.0, f64::max);
    1e-14 * scale.max(1e-300)
}

pub fn uniqueness_detail(t: &GeneralTensor2) -> UniquenessDetail {
    let tol = tolerance(t);
    let r11 = t.s11.re;
    let r22 = t.s22.re;
    let off = (t.s12 + t.s21.conj()).norm_sqr() / 4.0;
    UniquenessDetail {
        re_s11_nonnegative: r11 >= -tol,
        re_s22_nonnegative: r22 >= -tol,
        determinant_bound: r11 * r22 >= off - tol * tol.max(off.sqrt()),
    }
}

/// Positive semidefiniteness of the Hermitian part `(Σ + Σ^H)/2`.
pub fn check_uniqueness(t: &GeneralTensor2) -> bool {
    uniqueness_detail(t).ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub uniqueness_ok: bool,
    pub existence_ok: bool,
    pub theta_star: Option<f64>,
    pub gamma_star: Option<f64>,
    /// Largest smallest-eigenvalue found over the θ scan (may be ≤ 0).
    pub best_min_eigenvalue: f64,
    pub uniqueness_failures: Vec<String>,
}

/// Smallest eigenvalue of `M(θ) = cos θ (Σ+Σ^H)/2 + sin θ (Σ−Σ^H)/(2i)`.
pub fn coercivity_min_eigenvalue(t: &GeneralTensor2, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let h = t.adjoint();
    let i2 = Complex64::new(0.0, 2.0);
    let entry = |x: Complex64, y: Complex64| (x + y) / 2.0 * c + (x - y) / i2 * s;
    let m11 = entry(t.s11, h.s11).re;
    let m22 = entry(t.s22, h.s22).re;
    let m12 = entry(t.s12, h.s12);
    let mean = 0.5 * (m11 + m22);
    let half_gap = (0.25 * (m11 - m22).powi(2) + m12.norm_sqr()).sqrt();
    mean - half_gap
}

/// Scans `θ ∈ [0, π/2]` for uniform positivity of `M(θ)`.
pub fn check_existence(t: &GeneralTensor2, theta_samples: usize) -> Result<AdmissibilityReport> {
    if theta_samples < 2 {
        return Err(crate::Error::InvalidInput("theta_samples must be at least 2".into()));
    }
    if !t.is_finite() {
        return Err(crate::Error::InvalidInput("tensor entries must be finite".into()));
    }
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..theta_samples {
        let theta = FRAC_PI_2 * k as f64 / (theta_samples - 1) as f64;
        let e = coercivity_min_eigenvalue(t, theta);
        if e > best.1 {
            best = (theta, e);
        }
    }
    let detail = uniqueness_detail(t);
    let existence_ok = best.1 > tolerance(t);
    Ok(AdmissibilityReport {
        uniqueness_ok: detail.ok(),
        existence_ok,
        theta_star: existence_ok.then_some(best.0),
        gamma_star: existence_ok.then_some(best.1),
        best_min_eigenvalue: best.1,
        uniqueness_failures: detail.failures(),
    })
}

/// Both conditions at the default θ resolution.
pub fn admissibility(t: &GeneralTensor2) -> AdmissibilityReport {
    check_existence(t, DEFAULT_THETA_SAMPLES).expect("default sample count is valid")
}
