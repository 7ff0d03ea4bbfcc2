//! Spherical Bessel/Hankel functions, orthonormal associated Legendre
//! functions and tangential vector spherical harmonics.
//!
//! Conventions used throughout the crate:
//!
//! * `Y_n^m(θ, φ) = P̄_n^m(cos θ) e^{imφ}` is orthonormal on the unit sphere and
//!   carries the Condon–Shortley phase, so `Y_1^1 = -√(3/8π) sin θ e^{iφ}` and
//!   `Y_n^{-m} = (-1)^m conj(Y_n^m)`.
//! * `U_nm = ∇_S Y_n^m / √(n(n+1))` (gradient type) and `X_nm = x̂ × U_nm`
//!   (curl type). Both are orthonormal families in `L²_t(S²)`.
//! * The tangential frame at a direction is `t₁ = θ̂`, `t₂ = φ̂`; it is
//!   right-handed with the outward normal (`t₁ × t₂ = x̂`). At the poles the
//!   frame is the limit along the `φ = 0` meridian.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{CVec3, Error, Result, Vec3};

/// Tangential family of a vector spherical harmonic mode.
///
/// `TE` modes have curl-type (`X`) traces, `TM` modes gradient-type (`U`) traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    TE,
    TM,
}

/// Index of one term of a vector spherical harmonic expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeKey {
    pub n: usize,
    pub m: i64,
    pub family: Family,
}

impl ModeKey {
    pub fn new(n: usize, m: i64, family: Family) -> Result<Self> {
        if n == 0 || m.unsigned_abs() as usize > n {
            return Err(Error::InvalidInput(format!("invalid mode (n={n}, m={m})")));
        }
        Ok(Self { n, m, family })
    }
}

/// Number of `(n, m)` pairs with `1 ≤ n ≤ nmax`.
pub fn mode_count(nmax: usize) -> usize {
    nmax * (nmax + 2)
}

/// Position of `(n, m)` in the flattened ordering `n = 1.., m = -n..=n`.
pub fn mode_index(n: usize, m: i64) -> usize {
    debug_assert!(n >= 1 && m.unsigned_abs() as usize <= n);
    n * n - 1 + (m + n as i64) as usize
}

/// Inverse of [`mode_index`].
pub fn mode_from_index(idx: usize) -> (usize, i64) {
    let n = ((idx + 1) as f64).sqrt().floor() as usize;
    let n = if n * n > idx + 1 { n - 1 } else { n };
    let m = (idx + 1 - n * n) as i64 - n as i64;
    (n, m)
}

/// Radial value together with the Riccati-type term `(x f(x))′ / x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPair {
    pub value: Complex64,
    pub derivative_term: Complex64,
}

fn check_arg(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("spherical Bessel argument must be positive, got {x}")));
    }
    Ok(())
}

/// `j_0(x), …, j_nmax(x)` by Miller's downward recurrence.
pub fn sph_bessel_j_all(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    let start = nmax.max(x.ceil() as usize) + 60;
    let mut out = vec![0.0; nmax + 1];
    let mut f_next = 0.0_f64;
    let mut f = 1e-30_f64;
    // f holds the trial value at order k; recur down to k = 0.
    let mut k = start;
    loop {
        if k <= nmax {
            out[k] = f;
        }
        if k == 0 {
            break;
        }
        let f_prev = (2 * k + 1) as f64 / x * f - f_next;
        f_next = f;
        f = f_prev;
        k -= 1;
        if f.abs() > 1e250 {
            let s = 1e-250;
            f *= s;
            f_next *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    // Normalise against whichever of j0, j1 is better conditioned.
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    let trial1 = if nmax >= 1 { out[1] } else { f_next };
    let scale = if j0.abs() >= j1.abs() { j0 / out[0] } else { j1 / trial1 };
    for v in out.iter_mut() {
        *v *= scale;
    }
    Ok(out)
}

pub fn sph_bessel_j(n: usize, x: f64) -> Result<f64> {
    Ok(sph_bessel_j_all(n, x)?[n])
}

/// `y_0(x), …, y_nmax(x)` by upward recurrence.
pub fn sph_bessel_y_all(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    let (s, c) = x.sin_cos();
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(-c / x);
    if nmax >= 1 {
        out.push(-c / (x * x) - s / x);
    }
    for n in 1..nmax {
        let next = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        out.push(next);
    }
    Ok(out)
}

pub fn sph_bessel_y(n: usize, x: f64) -> Result<f64> {
    Ok(sph_bessel_y_all(n, x)?[n])
}

/// `h_n^{(1)}(x) = j_n(x) + i y_n(x)` for `n = 0..=nmax`.
pub fn sph_hankel1_all(nmax: usize, x: f64) -> Result<Vec<Complex64>> {
    let j = sph_bessel_j_all(nmax, x)?;
    let y = sph_bessel_y_all(nmax, x)?;
    Ok(j.into_iter().zip(y).map(|(a, b)| Complex64::new(a, b)).collect())
}

pub fn sph_hankel1(n: usize, x: f64) -> Result<Complex64> {
    Ok(sph_hankel1_all(n, x)?[n])
}

/// Derivatives `f_n′(x)` for a table `f_0..f_nmax` of any spherical Bessel kind,
/// given `f_{-1}` (which is `cos x / x` for `j`, `sin x / x` for `y`).
fn derivatives<T>(f: &[T], f_minus1: T, x: f64) -> Vec<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    (0..f.len())
        .map(|n| {
            let prev = if n == 0 { f_minus1 } else { f[n - 1] };
            prev - f[n] * ((n + 1) as f64 / x)
        })
        .collect()
}

pub fn sph_bessel_j_deriv_all(nmax: usize, x: f64) -> Result<Vec<f64>> {
    let j = sph_bessel_j_all(nmax, x)?;
    Ok(derivatives(&j, x.cos() / x, x))
}

pub fn sph_bessel_y_deriv_all(nmax: usize, x: f64) -> Result<Vec<f64>> {
    let y = sph_bessel_y_all(nmax, x)?;
    Ok(derivatives(&y, x.sin() / x, x))
}

fn riccati_from(values: &[Complex64], minus1: Complex64, x: f64) -> Vec<RadialPair> {
    (0..values.len())
        .map(|n| {
            let prev = if n == 0 { minus1 } else { values[n - 1] };
            RadialPair { value: values[n], derivative_term: prev - values[n] * (n as f64 / x) }
        })
        .collect()
}

/// `(j_n(x), (x j_n(x))′/x)` for `n = 0..=nmax`.
pub fn riccati_pairs_j(nmax: usize, x: f64) -> Result<Vec<RadialPair>> {
    let j: Vec<Complex64> = sph_bessel_j_all(nmax, x)?.into_iter().map(Complex64::from).collect();
    Ok(riccati_from(&j, Complex64::from(x.cos() / x), x))
}

/// `(h_n^{(1)}(x), (x h_n^{(1)}(x))′/x)` for `n = 0..=nmax`.
pub fn riccati_pairs_h(nmax: usize, x: f64) -> Result<Vec<RadialPair>> {
    let h = sph_hankel1_all(nmax, x)?;
    Ok(riccati_from(&h, Complex64::new(x.cos() / x, x.sin() / x), x))
}

/// Polar/azimuthal angles and tangential frame of a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalFrame {
    pub theta: f64,
    pub phi: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
    /// `θ̂`
    pub t1: Vec3,
    /// `φ̂`
    pub t2: Vec3,
}

const POLE_TOL: f64 = 1e-10;

pub fn check_unit(d: &Vec3) -> Result<()> {
    if (d.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("direction {:?} is not a unit vector", d.as_slice())));
    }
    Ok(())
}

pub fn spherical_frame(d: &Vec3) -> Result<SphericalFrame> {
    check_unit(d)?;
    let rho = d.x.hypot(d.y);
    let theta = rho.atan2(d.z);
    let phi = if rho < POLE_TOL { 0.0 } else { d.y.atan2(d.x) };
    let (st, ct) = if rho < POLE_TOL { (0.0, d.z.signum()) } else { (rho, d.z) };
    let (sp, cp) = phi.sin_cos();
    Ok(SphericalFrame {
        theta,
        phi,
        cos_theta: ct,
        sin_theta: st,
        t1: Vec3::new(ct * cp, ct * sp, -st),
        t2: Vec3::new(-sp, cp, 0.0),
    })
}

/// Orthonormal associated Legendre data at one polar angle for `0 ≤ m ≤ n ≤ nmax`.
///
/// Stores `P̄_n^m`, `P̄_n^m / sin θ` (for `m ≥ 1`) and `dP̄_n^m/dθ`, all evaluated
/// without dividing by `sin θ`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    nmax: usize,
    p: Vec<f64>,
    q: Vec<f64>,
    dp: Vec<f64>,
}

impl LegendreTable {
    fn idx(n: usize, m: usize) -> usize {
        n * (n + 1) / 2 + m
    }

    pub fn new(nmax: usize, cos_theta: f64, sin_theta: f64) -> Self {
        let len = (nmax + 1) * (nmax + 2) / 2;
        let mut p = vec![0.0; len];
        let mut q = vec![0.0; len];
        let mut dp = vec![0.0; len];
        let (c, s) = (cos_theta, sin_theta);
        let mut pmm = 1.0 / (4.0 * PI).sqrt();
        for m in 0..=nmax {
            let mut qmm = 0.0;
            if m > 0 {
                let f = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
                qmm = f * pmm;
                pmm = f * s * pmm;
            }
            p[Self::idx(m, m)] = pmm;
            q[Self::idx(m, m)] = qmm;
            if m < nmax {
                let f = ((2 * m + 3) as f64).sqrt() * c;
                p[Self::idx(m + 1, m)] = f * pmm;
                q[Self::idx(m + 1, m)] = f * qmm;
            }
            for n in (m + 2)..=nmax {
                let (nf, mf) = (n as f64, m as f64);
                let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
                let b = (((nf - 1.0).powi(2) - mf * mf) / (4.0 * (nf - 1.0).powi(2) - 1.0)).sqrt();
                p[Self::idx(n, m)] = a * (c * p[Self::idx(n - 1, m)] - b * p[Self::idx(n - 2, m)]);
                q[Self::idx(n, m)] = a * (c * q[Self::idx(n - 1, m)] - b * q[Self::idx(n - 2, m)]);
            }
        }
        for n in 1..=nmax {
            let nf = n as f64;
            dp[Self::idx(n, 0)] = (nf * (nf + 1.0)).sqrt() * p[Self::idx(n, 1)];
            for m in 1..=n {
                let mf = m as f64;
                let lower = if n > m {
                    ((2.0 * nf + 1.0) * (nf * nf - mf * mf) / (2.0 * nf - 1.0)).sqrt() * q[Self::idx(n - 1, m)]
                } else {
                    0.0
                };
                dp[Self::idx(n, m)] = nf * c * q[Self::idx(n, m)] - lower;
            }
        }
        Self { nmax, p, q, dp }
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }
    pub fn p(&self, n: usize, m: usize) -> f64 {
        self.p[Self::idx(n, m)]
    }
    pub fn p_over_sin(&self, n: usize, m: usize) -> f64 {
        self.q[Self::idx(n, m)]
    }
    pub fn dp_dtheta(&self, n: usize, m: usize) -> f64 {
        self.dp[Self::idx(n, m)]
    }
}

/// Scalar and tangential vector spherical harmonics of one `(n, m)` at one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vsh {
    pub y: Complex64,
    pub u: CVec3,
    pub x: CVec3,
    /// `U` in frame components `(t₁, t₂)`.
    pub u_frame: [Complex64; 2],
    /// `X` in frame components `(t₁, t₂)`.
    pub x_frame: [Complex64; 2],
}

/// All harmonics with `1 ≤ n ≤ nmax` at one direction, in [`mode_index`] order.
#[derive(Debug, Clone)]
pub struct VshTable {
    pub nmax: usize,
    pub direction: Vec3,
    pub frame: SphericalFrame,
    pub entries: Vec<Vsh>,
}

impl VshTable {
    pub fn get(&self, n: usize, m: i64) -> &Vsh {
        &self.entries[mode_index(n, m)]
    }
}

fn frame_vec(frame: &SphericalFrame, c: [Complex64; 2]) -> CVec3 {
    frame.t1.map(Complex64::from) * c[0] + frame.t2.map(Complex64::from) * c[1]
}

pub fn vsh_all(nmax: usize, direction: &Vec3) -> Result<VshTable> {
    let frame = spherical_frame(direction)?;
    let leg = LegendreTable::new(nmax, frame.cos_theta, frame.sin_theta);
    let mut entries = Vec::with_capacity(mode_count(nmax));
    for n in 1..=nmax {
        let norm = 1.0 / ((n * (n + 1)) as f64).sqrt();
        for m in -(n as i64)..=(n as i64) {
            let ma = m.unsigned_abs() as usize;
            let phase = Complex64::from_polar(1.0, ma as f64 * frame.phi);
            let y = phase * leg.p(n, ma);
            let u_theta = phase * (leg.dp_dtheta(n, ma) * norm);
            let u_phi = if ma == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                phase * Complex64::new(0.0, ma as f64 * leg.p_over_sin(n, ma) * norm)
            };
            let (y, u_frame) = if m >= 0 {
                (y, [u_theta, u_phi])
            } else {
                let sign = if ma % 2 == 0 { 1.0 } else { -1.0 };
                (y.conj() * sign, [u_theta.conj() * sign, u_phi.conj() * sign])
            };
            // x̂ × (a θ̂ + b φ̂) = a φ̂ − b θ̂
            let x_frame = [-u_frame[1], u_frame[0]];
            entries.push(Vsh {
                y,
                u: frame_vec(&frame, u_frame),
                x: frame_vec(&frame, x_frame),
                u_frame,
                x_frame,
            });
        }
    }
    Ok(VshTable { nmax, direction: *direction, frame, entries })
}

/// `(Y_n^m, U_nm, X_nm)` at a unit direction.
pub fn vsh_eval(n: usize, m: i64, direction: &Vec3) -> Result<(Complex64, CVec3, CVec3)> {
    ModeKey::new(n, m, Family::TE)?;
    let table = vsh_all(n, direction)?;
    let v = table.get(n, m);
    Ok((v.y, v.u, v.x))
}
