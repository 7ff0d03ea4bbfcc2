//! The auxiliary exterior problem `ν × curl E − λ S E_T = 0` on the unit sphere.
//!
//! On the sphere the smoothing operator `S = −curl_S Δ_S⁻¹ curl_S` is the
//! orthogonal projection onto curl-type fields: `curl_S X_nm = √(n(n+1)) Y_nm`
//! and `curl_S U_nm = 0`, so `S X_nm = X_nm` and `S U_nm = 0`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mie::{self, BoundaryRadial, FieldExpansion, Incident, ModeCoefficients};
use crate::specfun::{self, mode_count};
use crate::tensor::SurfaceTensor;
use crate::{CVec3, Error, Result, Vec3};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const POLE_TOLERANCE: f64 = 1e-13;

/// Applies `S` to tangential coefficients `[X, U]` given in mode order.
pub fn smoothing_operator_s(coefficients: &[[Complex64; 2]]) -> Vec<[Complex64; 2]> {
    coefficients.iter().map(|c| [c[0], ZERO]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxParameter {
    pub lambda: Complex64,
}

impl AuxParameter {
    pub fn new(lambda: Complex64) -> Result<Self> {
        if !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(Error::InvalidInput(format!("lambda must be finite, got {lambda}")));
        }
        if lambda.im < 0.0 {
            log::debug!("auxiliary parameter {lambda} has negative imaginary part; uniqueness not guaranteed");
        }
        Ok(Self { lambda })
    }

    pub fn real(lambda: f64) -> Result<Self> {
        Self::new(Complex64::new(lambda, 0.0))
    }

    /// Outside the half plane `Im λ ≥ 0` where uniqueness is known.
    pub fn is_flagged(&self) -> bool {
        self.lambda.im < 0.0
    }
}

/// One mode of an auxiliary solution; index 0 is TE, 1 is TM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxMode {
    pub n: usize,
    pub m: i64,
    pub incident: [Complex64; 2],
    pub scattered: [Complex64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxModeSolution {
    pub kappa: f64,
    pub nmax: usize,
    pub lambda: Complex64,
    pub modes: Vec<AuxMode>,
}

/// Scattered amplitude per unit incident amplitude, `[TE, TM]`, for degree `n`.
pub fn aux_transfer(n: usize, lambda: Complex64, radial: &BoundaryRadial) -> Result<[Complex64; 2]> {
    let kappa = radial.kappa;
    let (jz, jd) = (radial.j[n].value, radial.j[n].derivative_term);
    let (hz, hd) = (radial.h[n].value, radial.h[n].derivative_term);
    let den = hd * kappa + lambda * hz;
    let scale = kappa * hd.norm() + lambda.norm() * hz.norm();
    if den.norm() < POLE_TOLERANCE * scale {
        return Err(Error::AuxPole { n, lambda });
    }
    let te = -(jd * kappa + lambda * jz) / den;
    let tm = -jz / hz;
    Ok([te, tm])
}

/// Scattered coefficients `[TE, TM]` of degree `n` for one incident pair.
pub fn solve_aux_mode(n: usize, lambda: Complex64, kappa: f64, incident: [Complex64; 2]) -> Result<[Complex64; 2]> {
    if n == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidInput(format!("wave number must be positive, got {kappa}")));
    }
    let radial = BoundaryRadial::new(n, kappa)?;
    let t = aux_transfer(n, lambda, &radial)?;
    Ok([t[0] * incident[0], t[1] * incident[1]])
}

/// Transfers for `1 ≤ n ≤ nmax`, in degree order.
pub fn aux_transfers(lambda: Complex64, kappa: f64, nmax: usize) -> Result<Vec<[Complex64; 2]>> {
    let radial = BoundaryRadial::new(nmax, kappa)?;
    (1..=nmax).into_par_iter().map(|n| aux_transfer(n, lambda, &radial)).collect()
}

pub fn solve_aux(incident: &Incident, lambda: AuxParameter, nmax: usize) -> Result<AuxModeSolution> {
    let kappa = incident.kappa();
    let inc = mie::incident_coefficients(incident, nmax)?;
    let transfers = aux_transfers(lambda.lambda, kappa, nmax)?;
    let modes = inc
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let (n, m) = specfun::mode_from_index(idx);
            let t = transfers[n - 1];
            AuxMode { n, m, incident: *c, scattered: [t[0] * c[0], t[1] * c[1]] }
        })
        .collect();
    Ok(AuxModeSolution { kappa, nmax, lambda: lambda.lambda, modes })
}

impl AuxModeSolution {
    pub fn far_field(&self, xhat: &Vec3) -> Result<CVec3> {
        let table = specfun::vsh_all(self.nmax, xhat)?;
        Ok(mie::far_field_from_scattered(self.kappa, &table, self.modes.iter().map(|m| m.scattered)))
    }

    /// Exterior field as a [`FieldExpansion`] with no interior part, for evaluation.
    pub fn to_field_expansion(&self) -> FieldExpansion {
        debug_assert_eq!(self.modes.len(), mode_count(self.nmax));
        FieldExpansion {
            kappa: self.kappa,
            nmax: self.nmax,
            sigma: SurfaceTensor::zero(),
            modes: self
                .modes
                .iter()
                .map(|m| ModeCoefficients {
                    n: m.n,
                    m: m.m,
                    incident: m.incident,
                    interior: [ZERO; 2],
                    scattered: m.scattered,
                })
                .collect(),
            truncation_tail: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mie::PlaneWave;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn s_keeps_curl_type_and_kills_gradient_type() {
        let mut v = vec![[ZERO; 2]; mode_count(3)];
        v[specfun::mode_index(2, 1)][0] = c(1.0, 0.0);
        v[specfun::mode_index(3, 0)][1] = c(1.0, 0.0);
        let s = smoothing_operator_s(&v);
        assert_eq!(s[specfun::mode_index(2, 1)], [c(1.0, 0.0), ZERO]);
        assert_eq!(s[specfun::mode_index(3, 0)], [ZERO, ZERO]);
    }

    #[test]
    fn tm_is_lambda_independent() {
        let a = solve_aux_mode(2, c(0.3, 0.0), 1.9, [c(1.0, 0.0), c(0.5, 0.2)]).unwrap();
        let b = solve_aux_mode(2, c(7.0, 2.0), 1.9, [c(1.0, 0.0), c(0.5, 0.2)]).unwrap();
        assert_eq!(a[1], b[1]);
        assert_ne!(a[0], b[0]);
    }

    #[test]
    fn pole_is_reported() {
        let radial = BoundaryRadial::new(2, 1.9).unwrap();
        let (hz, hd) = (radial.h[1].value, radial.h[1].derivative_term);
        // the pole lies off the real axis: λ = −κ h′/h
        let lambda = -(hd * 1.9) / hz;
        assert!(lambda.im < 0.0);
        match aux_transfer(1, lambda, &radial) {
            Err(Error::AuxPole { n, .. }) => assert_eq!(n, 1),
            other => panic!("expected pole, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_finite_lambda() {
        assert!(AuxParameter::new(c(f64::NAN, 0.0)).is_err());
        assert!(AuxParameter::new(c(0.0, -1.0)).unwrap().is_flagged());
    }

    #[test]
    fn far_field_is_tangential() {
        let w = PlaneWave::new(Vec3::new(0.0, 0.0, 1.0), CVec3::new(c(1.0, 0.0), ZERO, ZERO), 1.9).unwrap();
        let s = solve_aux(&Incident::PlaneWave(w), AuxParameter::real(0.5).unwrap(), 17).unwrap();
        let x = Vec3::new(0.3, -0.4, 0.5).normalize();
        let ff = s.far_field(&x).unwrap();
        assert!(crate::cvec(&x).dot(&ff).norm() < 1e-12 * ff.norm().max(1.0));
    }
}
