//! Exact spectral solution of the screen transmission problem on the unit sphere.
//!
//! Fields are expanded in the regular and radiating vector wave functions
//!
//! ```text
//! M_nm = z_n(κr) X_nm(x̂)
//! N_nm = curl M_nm / κ = −( √(n(n+1)) z_n(κr)/(κr) Y_nm x̂ + D_n(κr) U_nm ),   D_n(ρ) = (ρ z_n(ρ))′/ρ
//! ```
//!
//! with `z = j` (regular) or `z = h⁽¹⁾` (radiating), so that `curl N = κ M`.
//! On `r = 1` a field `p M + q N` has tangential trace `−q D U + p z X` and
//! `ν × curl = −κ q z U − κ p D X`. Because `Σ = aI + bJ` maps `U_nm ↦ X_nm`
//! and `X_nm ↦ −U_nm` (up to the factors `a`, `b`), every `(n, m)` decouples
//! into a 4×4 block with unknowns `(α, β, c, d)`: interior TE/TM and scattered
//! TE/TM coefficients.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::specfun::{self, mode_count, mode_index, riccati_pairs_h, riccati_pairs_j, RadialPair, VshTable};
use crate::tensor::SurfaceTensor;
use crate::{cvec, CVec3, Error, Result, Vec3};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const SINGULAR_CONDITION: f64 = 1e12;
pub const TAIL_WARNING: f64 = 1e-10;

/// Incident plane wave `iκ (d × p) × d e^{iκ d·x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWave {
    pub direction: Vec3,
    pub polarization: CVec3,
    pub kappa: f64,
}

impl PlaneWave {
    pub fn new(direction: Vec3, polarization: CVec3, kappa: f64) -> Result<Self> {
        specfun::check_unit(&direction)?;
        if !(kappa > 0.0) {
            return Err(Error::InvalidInput(format!("wave number must be positive, got {kappa}")));
        }
        let pn = polarization.norm();
        if pn == 0.0 {
            return Err(Error::InvalidInput("polarization must be nonzero".into()));
        }
        if cvec(&direction).dot(&polarization).norm() > 1e-12 * pn {
            return Err(Error::InvalidInput("polarization must be orthogonal to the direction".into()));
        }
        Ok(Self { direction, polarization, kappa })
    }

    /// Direct evaluation of the incident field.
    pub fn evaluate(&self, x: &Vec3) -> CVec3 {
        let phase = Complex64::from_polar(1.0, self.kappa * self.direction.dot(x));
        self.polarization * (I * self.kappa * phase)
    }
}

/// Tangential Herglotz kernel on the direction sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HerglotzKernel {
    /// `g = Σ (g_X X_nm + g_U U_nm)`; entries `[g_X, g_U]` in mode order.
    Modal { nmax: usize, coefficients: Vec<[Complex64; 2]> },
    /// Quadrature samples: `g(d_j)` weighted by `w_j`.
    Sampled { nodes: Vec<Vec3>, weights: Vec<f64>, values: Vec<CVec3> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Incident {
    PlaneWave(PlaneWave),
    /// Electric Herglotz wave function `iκ ∫ e^{iκ d·x} g(d) ds(d)`.
    Herglotz { kappa: f64, kernel: HerglotzKernel },
}

impl Incident {
    pub fn kappa(&self) -> f64 {
        match self {
            Incident::PlaneWave(w) => w.kappa,
            Incident::Herglotz { kappa, .. } => *kappa,
        }
    }
}

/// Which side of the screen a point is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Interior,
    Exterior,
}

/// Coefficients of one `(n, m)`; index 0 is TE (`M`), index 1 is TM (`N`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficients {
    pub n: usize,
    pub m: i64,
    pub incident: [Complex64; 2],
    pub interior: [Complex64; 2],
    pub scattered: [Complex64; 2],
}

/// Solution of the forward problem as a truncated mode expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldExpansion {
    pub kappa: f64,
    pub nmax: usize,
    pub sigma: SurfaceTensor,
    pub modes: Vec<ModeCoefficients>,
    /// Largest incident coefficient magnitude at degree `nmax`.
    pub truncation_tail: f64,
}

/// Radial traces on the unit sphere, indexed by degree.
#[derive(Debug, Clone)]
pub struct BoundaryRadial {
    pub kappa: f64,
    pub j: Vec<RadialPair>,
    pub h: Vec<RadialPair>,
}

impl BoundaryRadial {
    pub fn new(nmax: usize, kappa: f64) -> Result<Self> {
        Ok(Self { kappa, j: riccati_pairs_j(nmax, kappa)?, h: riccati_pairs_h(nmax, kappa)? })
    }
}

fn four_pi_i_kappa(kappa: f64) -> Complex64 {
    Complex64::new(0.0, 4.0 * PI * kappa)
}

fn i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

fn minus_i_pow(n: usize) -> Complex64 {
    i_pow(n).conj()
}

/// Regular-mode coefficients `[a_nm, b_nm]` of a plane wave, given the harmonics at `d`.
pub(crate) fn plane_wave_coefficients_from_table(table: &VshTable, p: &CVec3, kappa: f64) -> Vec<[Complex64; 2]> {
    let pre = four_pi_i_kappa(kappa);
    table
        .entries
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let (n, _) = specfun::mode_from_index(idx);
            let te = pre * i_pow(n) * p.dot(&v.x.conjugate());
            let tm = pre * i_pow(n + 1) * p.dot(&v.u.conjugate());
            [te, tm]
        })
        .collect()
}

/// Plane-wave expansion coefficients `[TE, TM]` for `1 ≤ n ≤ nmax`, in mode order.
pub fn plane_wave_coefficients(w: &PlaneWave, nmax: usize) -> Result<Vec<[Complex64; 2]>> {
    let table = specfun::vsh_all(nmax, &w.direction)?;
    let coeffs = plane_wave_coefficients_from_table(&table, &w.polarization, w.kappa);
    let tail = tail_magnitude(&coeffs, nmax);
    if tail > TAIL_WARNING {
        log::warn!("plane-wave expansion truncated at n={nmax} with tail coefficient {tail:.3e}");
    }
    Ok(coeffs)
}

/// Incident coefficients of a Herglotz wave function.
pub fn herglotz_coefficients(kappa: f64, kernel: &HerglotzKernel, nmax: usize) -> Result<Vec<[Complex64; 2]>> {
    let mut out = vec![[ZERO; 2]; mode_count(nmax)];
    match kernel {
        HerglotzKernel::Modal { nmax: kn, coefficients } => {
            let pre = four_pi_i_kappa(kappa);
            for (idx, g) in coefficients.iter().enumerate().take(mode_count(nmax.min(*kn))) {
                let (n, _) = specfun::mode_from_index(idx);
                out[idx] = [pre * i_pow(n) * g[0], pre * i_pow(n + 1) * g[1]];
            }
        }
        HerglotzKernel::Sampled { nodes, weights, values } => {
            if nodes.len() != weights.len() || nodes.len() != values.len() {
                return Err(Error::InvalidInput("sampled kernel arrays differ in length".into()));
            }
            for ((d, w), g) in nodes.iter().zip(weights).zip(values) {
                let table = specfun::vsh_all(nmax, d)?;
                let c = plane_wave_coefficients_from_table(&table, g, kappa);
                for (o, ci) in out.iter_mut().zip(c) {
                    o[0] += ci[0] * *w;
                    o[1] += ci[1] * *w;
                }
            }
        }
    }
    Ok(out)
}

pub fn incident_coefficients(incident: &Incident, nmax: usize) -> Result<Vec<[Complex64; 2]>> {
    match incident {
        Incident::PlaneWave(w) => plane_wave_coefficients(w, nmax),
        Incident::Herglotz { kappa, kernel } => herglotz_coefficients(*kappa, kernel, nmax),
    }
}

fn tail_magnitude(coeffs: &[[Complex64; 2]], nmax: usize) -> f64 {
    if nmax == 0 {
        return 0.0;
    }
    let start = mode_index(nmax, -(nmax as i64));
    coeffs[start..].iter().flat_map(|c| c.iter().map(|z| z.norm())).fold(0.0, f64::max)
}

/// The 4×4 matching system of one degree; unknowns `(α, β, c, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBlock {
    pub n: usize,
    pub matrix: Matrix4<Complex64>,
    /// Right-hand side per unit incident TE (column 0) and TM (column 1) amplitude.
    pub rhs: [Vector4<Complex64>; 2],
}

impl ModeBlock {
    pub fn assemble(n: usize, sigma: &SurfaceTensor, radial: &BoundaryRadial) -> Self {
        let (jz, jd) = (radial.j[n].value, radial.j[n].derivative_term);
        let (hz, hd) = (radial.h[n].value, radial.h[n].derivative_term);
        let (a, b) = (sigma.a, sigma.b);
        #[rustfmt::skip]
        let matrix = Matrix4::new(
            // tangential continuity, U then X component
            ZERO,             jd,               ZERO, -hd,
            jz,               ZERO,             -hz,  ZERO,
            // rotated-curl jump, U then X component
            I * b * jz,       jz + I * a * jd,  ZERO, -hz,
            jd - I * a * jz,  I * b * jd,       -hd,  ZERO,
        );
        let rhs_te = Vector4::new(ZERO, jz, ZERO, jd);
        let rhs_tm = Vector4::new(jd, ZERO, jz, ZERO);
        Self { n, matrix, rhs: [rhs_te, rhs_tm] }
    }

    /// Row/column equilibrated copy and the column scaling used.
    fn equilibrated(&self) -> (Matrix4<Complex64>, [f64; 4], [f64; 4]) {
        let mut m = self.matrix;
        let mut col = [1.0; 4];
        for j in 0..4 {
            let s = (0..4).map(|i| m[(i, j)].norm()).fold(0.0, f64::max);
            if s > 0.0 {
                col[j] = 1.0 / s;
                for i in 0..4 {
                    m[(i, j)] *= col[j];
                }
            }
        }
        let mut row = [1.0; 4];
        for i in 0..4 {
            let s = (0..4).map(|j| m[(i, j)].norm()).fold(0.0, f64::max);
            if s > 0.0 {
                row[i] = 1.0 / s;
                for j in 0..4 {
                    m[(i, j)] *= row[i];
                }
            }
        }
        (m, row, col)
    }

    /// 2-norm condition number of the equilibrated block.
    pub fn condition_number(&self) -> f64 {
        let (m, _, _) = self.equilibrated();
        let sv = m.singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Interior and scattered coefficients per unit TE and TM incidence:
    /// `out[k] = [α, β, c, d]` for incident family `k`.
    pub fn solve_unit(&self) -> Result<[[Complex64; 4]; 2]> {
        let condition = self.condition_number();
        if !(condition <= SINGULAR_CONDITION) {
            return Err(Error::SingularMode { n: self.n, condition });
        }
        let (m, row, col) = self.equilibrated();
        let lu = m.lu();
        let mut out = [[ZERO; 4]; 2];
        for (k, rhs) in self.rhs.iter().enumerate() {
            let scaled = Vector4::from_fn(|i, _| rhs[i] * row[i]);
            let y = lu
                .solve(&scaled)
                .ok_or(Error::SingularMode { n: self.n, condition: f64::INFINITY })?;
            for i in 0..4 {
                out[k][i] = y[i] * col[i];
            }
        }
        Ok(out)
    }
}

/// Linear map from incident `[TE, TM]` to interior and scattered coefficients of one degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTransfer {
    pub n: usize,
    /// `interior[i][k]`: interior family `i` per unit incident family `k`.
    pub interior: [[Complex64; 2]; 2],
    pub scattered: [[Complex64; 2]; 2],
}

impl ModeTransfer {
    pub fn apply(&self, inc: [Complex64; 2]) -> ([Complex64; 2], [Complex64; 2]) {
        let mul = |t: &[[Complex64; 2]; 2]| {
            [t[0][0] * inc[0] + t[0][1] * inc[1], t[1][0] * inc[0] + t[1][1] * inc[1]]
        };
        (mul(&self.interior), mul(&self.scattered))
    }
}

pub fn screen_transfer(n: usize, sigma: &SurfaceTensor, radial: &BoundaryRadial) -> Result<ModeTransfer> {
    if sigma.is_zero() {
        let one = Complex64::new(1.0, 0.0);
        return Ok(ModeTransfer { n, interior: [[one, ZERO], [ZERO, one]], scattered: [[ZERO; 2]; 2] });
    }
    let unit = ModeBlock::assemble(n, sigma, radial).solve_unit()?;
    let mut t = ModeTransfer { n, interior: [[ZERO; 2]; 2], scattered: [[ZERO; 2]; 2] };
    for k in 0..2 {
        t.interior[0][k] = unit[k][0];
        t.interior[1][k] = unit[k][1];
        t.scattered[0][k] = unit[k][2];
        t.scattered[1][k] = unit[k][3];
    }
    Ok(t)
}

/// Transfers for all degrees `1..=nmax`, solved concurrently and merged in order.
pub fn screen_transfers(sigma: &SurfaceTensor, kappa: f64, nmax: usize) -> Result<Vec<ModeTransfer>> {
    let radial = BoundaryRadial::new(nmax, kappa)?;
    (1..=nmax).into_par_iter().map(|n| screen_transfer(n, sigma, &radial)).collect()
}

/// Solves the matching conditions of degree `n` for one incident `[TE, TM]` pair.
/// Returns `(interior, scattered)`.
pub fn solve_screen_mode(
    n: usize,
    sigma: &SurfaceTensor,
    kappa: f64,
    incident: [Complex64; 2],
) -> Result<([Complex64; 2], [Complex64; 2])> {
    if n == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidInput(format!("wave number must be positive, got {kappa}")));
    }
    let radial = BoundaryRadial::new(n, kappa)?;
    Ok(screen_transfer(n, sigma, &radial)?.apply(incident))
}

pub fn solve_forward(incident: &Incident, sigma: &SurfaceTensor, nmax: usize) -> Result<FieldExpansion> {
    let kappa = incident.kappa();
    let inc = incident_coefficients(incident, nmax)?;
    let transfers = screen_transfers(sigma, kappa, nmax)?;
    let modes = inc
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let (n, m) = specfun::mode_from_index(idx);
            let (interior, scattered) = transfers[n - 1].apply(*c);
            ModeCoefficients { n, m, incident: *c, interior, scattered }
        })
        .collect();
    Ok(FieldExpansion { kappa, nmax, sigma: *sigma, modes, truncation_tail: tail_magnitude(&inc, nmax) })
}

/// Radial factors of `M` and `N` for one degree at `ρ = κr`.
struct ModeRadial {
    z: Complex64,
    d: Complex64,
    z_over_rho: Complex64,
}

fn mode_field(
    vsh: &specfun::Vsh,
    xhat: &CVec3,
    n: usize,
    r: &ModeRadial,
    p: Complex64,
    q: Complex64,
) -> (CVec3, CVec3) {
    // returns (p M + q N, p N + q M) with N, M evaluated for this radial kind
    let nn1 = ((n * (n + 1)) as f64).sqrt();
    let m_vec = vsh.x * r.z;
    let n_vec = -(xhat * (r.z_over_rho * nn1 * vsh.y) + vsh.u * r.d);
    (m_vec * p + n_vec * q, n_vec * p + m_vec * q)
}

fn radial_table(nmax: usize, rho: f64, kind: RadialKind) -> Result<Vec<ModeRadial>> {
    let pairs = match kind {
        RadialKind::Regular => riccati_pairs_j(nmax, rho)?,
        RadialKind::Radiating => riccati_pairs_h(nmax, rho)?,
    };
    Ok(pairs
        .into_iter()
        .map(|p| ModeRadial { z: p.value, d: p.derivative_term, z_over_rho: p.value / rho })
        .collect())
}

#[derive(Clone, Copy)]
enum RadialKind {
    Regular,
    Radiating,
}

/// Sums `Σ (p M + q N)` and its curl for coefficient pairs in mode order.
fn sum_modes(
    table: &VshTable,
    radial: &[ModeRadial],
    coeffs: impl Iterator<Item = [Complex64; 2]>,
    kappa: f64,
) -> (CVec3, CVec3) {
    let xhat = cvec(&table.direction);
    let mut e = CVec3::zeros();
    let mut curl = CVec3::zeros();
    for (idx, c) in coeffs.enumerate() {
        let (n, _) = specfun::mode_from_index(idx);
        let (f, g) = mode_field(&table.entries[idx], &xhat, n, &radial[n], c[0], c[1]);
        e += f;
        curl += g * Complex64::from(kappa);
    }
    (e, curl)
}

fn field_and_curl(e: &FieldExpansion, x: &Vec3, side: Side) -> Result<(CVec3, CVec3)> {
    let r = x.norm();
    if !(r > 0.0) {
        return Err(Error::InvalidInput("evaluation point must be away from the origin".into()));
    }
    let xhat = x / r;
    let table = specfun::vsh_all(e.nmax, &xhat)?;
    let rho = e.kappa * r;
    let regular = radial_table(e.nmax, rho, RadialKind::Regular)?;
    match side {
        Side::Interior => Ok(sum_modes(&table, &regular, e.modes.iter().map(|m| m.interior), e.kappa)),
        Side::Exterior => {
            let radiating = radial_table(e.nmax, rho, RadialKind::Radiating)?;
            let (ei, ci) = sum_modes(&table, &regular, e.modes.iter().map(|m| m.incident), e.kappa);
            let (es, cs) = sum_modes(&table, &radiating, e.modes.iter().map(|m| m.scattered), e.kappa);
            Ok((ei + es, ci + cs))
        }
    }
}

fn check_side(x: &Vec3, side: Side) -> Result<()> {
    let r = x.norm();
    if (r - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidInput("evaluation point lies on the screen; use boundary_values".into()));
    }
    match (side, r < 1.0) {
        (Side::Interior, true) | (Side::Exterior, false) => Ok(()),
        _ => Err(Error::InvalidInput(format!("point with |x| = {r} is not on the {side:?} side"))),
    }
}

/// Total field at `x` (interior field inside, incident plus scattered outside).
pub fn evaluate_field(e: &FieldExpansion, x: &Vec3, side: Side) -> Result<CVec3> {
    check_side(x, side)?;
    if e.truncation_tail > TAIL_WARNING {
        log::warn!("field expansion tail {:.3e} exceeds {TAIL_WARNING:e}", e.truncation_tail);
    }
    Ok(field_and_curl(e, x, side)?.0)
}

/// `curl E` at `x`, from `curl M = κN`, `curl N = κM`.
pub fn evaluate_curl(e: &FieldExpansion, x: &Vec3, side: Side) -> Result<CVec3> {
    check_side(x, side)?;
    Ok(field_and_curl(e, x, side)?.1)
}

/// Scattered field only, at any `|x| > 0`.
pub fn evaluate_scattered(e: &FieldExpansion, x: &Vec3) -> Result<CVec3> {
    let r = x.norm();
    let table = specfun::vsh_all(e.nmax, &(x / r))?;
    let radiating = radial_table(e.nmax, e.kappa * r, RadialKind::Radiating)?;
    Ok(sum_modes(&table, &radiating, e.modes.iter().map(|m| m.scattered), e.kappa).0)
}

/// `(E, curl E)` on the screen `|x| = 1`, taken from the given side.
pub fn boundary_values(e: &FieldExpansion, xhat: &Vec3, side: Side) -> Result<(CVec3, CVec3)> {
    specfun::check_unit(xhat)?;
    field_and_curl(e, xhat, side)
}

/// Far field pattern from radiating coefficients `[TE, TM]` in mode order:
/// `E^∞ = κ⁻¹ Σ ((−i)^{n+1} c X − (−i)^n d U)`.
pub fn far_field_from_scattered(kappa: f64, table: &VshTable, scattered: impl Iterator<Item = [Complex64; 2]>) -> CVec3 {
    let mut out = CVec3::zeros();
    for (idx, c) in scattered.enumerate() {
        let (n, _) = specfun::mode_from_index(idx);
        let v = &table.entries[idx];
        out += v.x * (minus_i_pow(n + 1) * c[0]) - v.u * (minus_i_pow(n) * c[1]);
    }
    out / Complex64::from(kappa)
}

pub fn far_field(e: &FieldExpansion, xhat: &Vec3) -> Result<CVec3> {
    let table = specfun::vsh_all(e.nmax, xhat)?;
    Ok(far_field_from_scattered(e.kappa, &table, e.modes.iter().map(|m| m.scattered)))
}

/// `∫_Γ (Σ E_T) · conj(E_T) dA`, evaluated mode by mode from the interior trace.
pub fn surface_power(e: &FieldExpansion) -> Result<Complex64> {
    let radial = BoundaryRadial::new(e.nmax, e.kappa)?;
    let mut acc = ZERO;
    for m in &e.modes {
        let u = -m.interior[1] * radial.j[m.n].derivative_term;
        let x = m.interior[0] * radial.j[m.n].value;
        let su = e.sigma.a * u - e.sigma.b * x;
        let sx = e.sigma.a * x + e.sigma.b * u;
        acc += su * u.conj() + sx * x.conj();
    }
    Ok(acc)
}

impl FieldExpansion {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn wave_z() -> PlaneWave {
        PlaneWave::new(Vec3::new(0.0, 0.0, 1.0), CVec3::new(c(1.0, 0.0), ZERO, ZERO), 1.9).unwrap()
    }

    #[test]
    fn axial_plane_wave_only_has_m_pm1() {
        let coeffs = plane_wave_coefficients(&wave_z(), 10).unwrap();
        for (idx, cf) in coeffs.iter().enumerate() {
            let (_, m) = specfun::mode_from_index(idx);
            if m.abs() != 1 {
                assert!(cf[0].norm() < 1e-14 && cf[1].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn plane_wave_coefficients_linear_in_polarization() {
        let w = wave_z();
        let w2 = PlaneWave::new(w.direction, w.polarization * c(2.0, 0.0), w.kappa).unwrap();
        let a = plane_wave_coefficients(&w, 8).unwrap();
        let b = plane_wave_coefficients(&w2, 8).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x[0] * 2.0 - y[0]).norm() < 1e-14 && (x[1] * 2.0 - y[1]).norm() < 1e-14);
        }
    }

    #[test]
    fn plane_wave_validation() {
        let d = Vec3::new(0.0, 0.0, 1.0);
        assert!(PlaneWave::new(d, CVec3::new(ZERO, ZERO, c(1.0, 0.0)), 1.0).is_err());
        assert!(PlaneWave::new(d, CVec3::zeros(), 1.0).is_err());
        assert!(PlaneWave::new(d * 2.0, CVec3::new(c(1.0, 0.0), ZERO, ZERO), 1.0).is_err());
    }

    #[test]
    fn reconstruction_matches_plane_wave() {
        let d = Vec3::new(1.0, -2.0, 0.5).normalize();
        let p0 = CVec3::new(c(0.3, 0.2), c(-0.1, 1.0), c(0.5, 0.0));
        let p = p0 - cvec(&d) * cvec(&d).dot(&p0);
        let w = PlaneWave::new(d, p, 1.9).unwrap();
        let e = solve_forward(&Incident::PlaneWave(w), &SurfaceTensor::zero(), 22).unwrap();
        for x in [Vec3::new(0.3, 0.7, -1.2), Vec3::new(0.0, 0.0, 1.3), Vec3::new(-0.9, 0.1, 0.2)] {
            let side = if x.norm() < 1.0 { Side::Interior } else { Side::Exterior };
            let v = evaluate_field(&e, &x, side).unwrap();
            assert!((v - w.evaluate(&x)).norm() < 1e-8, "{:?}", x);
        }
    }

    #[test]
    fn zero_screen_gives_no_scattering() {
        let e = solve_forward(&Incident::PlaneWave(wave_z()), &SurfaceTensor::zero(), 17).unwrap();
        assert!(e.modes.iter().all(|m| m.scattered == [ZERO; 2] && m.interior == m.incident));
        let ff = far_field(&e, &Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(ff, CVec3::zeros());
    }

    #[test]
    fn uncoupled_screen_keeps_families_apart() {
        let radial = BoundaryRadial::new(4, 1.9).unwrap();
        let t = screen_transfer(2, &SurfaceTensor::new(c(0.0, 0.5), ZERO), &radial).unwrap();
        assert_eq!(t.scattered[0][1], ZERO);
        assert_eq!(t.scattered[1][0], ZERO);
        let t = screen_transfer(2, &SurfaceTensor::new(c(0.0, 0.5), c(0.1, 0.0)), &radial).unwrap();
        assert!(t.scattered[1][0].norm() > 1e-6);
    }

    #[test]
    fn solve_screen_mode_rejects_bad_input() {
        let s = SurfaceTensor::new(c(0.0, 0.5), ZERO);
        assert!(solve_screen_mode(0, &s, 1.9, [c(1.0, 0.0), ZERO]).is_err());
        assert!(solve_screen_mode(1, &s, 0.0, [c(1.0, 0.0), ZERO]).is_err());
    }

    #[test]
    fn evaluate_rejects_points_on_screen() {
        let e = solve_forward(&Incident::PlaneWave(wave_z()), &SurfaceTensor::zero(), 5).unwrap();
        assert!(evaluate_field(&e, &Vec3::new(1.0, 0.0, 0.0), Side::Exterior).is_err());
        assert!(evaluate_field(&e, &Vec3::new(0.5, 0.0, 0.0), Side::Exterior).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let s = SurfaceTensor::new(c(0.0, 0.5), c(0.1, 0.0));
        let e = solve_forward(&Incident::PlaneWave(wave_z()), &s, 4).unwrap();
        let back = FieldExpansion::from_json(&e.to_json().unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn scattered_tail_decays() {
        let s = SurfaceTensor::new(c(0.0, 0.5), c(0.1, 0.0));
        for kappa in [0.5, 1.9, 3.0] {
            let nmax = crate::default_truncation(kappa);
            let w = PlaneWave::new(Vec3::new(0.0, 0.0, 1.0), CVec3::new(c(1.0, 0.0), ZERO, ZERO), kappa).unwrap();
            let e = solve_forward(&Incident::PlaneWave(w), &s, nmax).unwrap();
            let tail = e
                .modes
                .iter()
                .filter(|m| m.n == nmax)
                .flat_map(|m| m.scattered)
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(tail < 1e-12, "kappa={kappa} tail={tail:e}");
        }
    }
}
