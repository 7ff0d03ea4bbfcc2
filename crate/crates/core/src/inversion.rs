//! Regularized far-field equations, indicator scans over `λ`, and peak detection.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::farfield::{modified_operator, sample_kernel, FarFieldMatrix, LambdaAssembler, LambdaCache};
use crate::{cvec, CMatrix, CVec3, Error, Result, Vec3};

pub type CVector = DVector<Complex64>;

/// Far field of the electric dipole `q` at `z`: `(iκ/4π) (x̂ × q) × x̂ e^{−iκ x̂·z}`.
pub fn dipole_far_field(xhat: &Vec3, z: &Vec3, q: &Vec3, kappa: f64) -> CVec3 {
    let t = xhat.cross(q).cross(xhat);
    let phase = Complex64::from_polar(kappa / (4.0 * PI), -kappa * xhat.dot(z)) * Complex64::new(0.0, 1.0);
    cvec(&t) * phase
}

/// SVD of a far-field matrix, reusable across right-hand sides and `α`.
#[derive(Debug, Clone)]
pub struct TikhonovFactor {
    u: CMatrix,
    v_t: CMatrix,
    sigma: Vec<f64>,
}

impl TikhonovFactor {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Decomposition("matrix has non-finite entries".into()));
        }
        let svd = m.clone().try_svd(true, true, 1e-15, 10_000).ok_or_else(|| Error::Decomposition("SVD did not converge".into()))?;
        let u = svd.u.ok_or_else(|| Error::Decomposition("missing U".into()))?;
        let v_t = svd.v_t.ok_or_else(|| Error::Decomposition("missing V".into()))?;
        Ok(Self { u, v_t, sigma: svd.singular_values.iter().cloned().collect() })
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.iter().cloned().fold(0.0, f64::max)
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    /// `(g, ‖Mg − rhs‖)` minimizing `‖Mg − rhs‖² + α‖g‖²`.
    pub fn solve(&self, rhs: &CVector, alpha: f64) -> Result<(CVector, f64)> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidInput(format!("regularization parameter must be positive, got {alpha}")));
        }
        if rhs.len() != self.u.nrows() {
            return Err(Error::InvalidInput(format!("right-hand side has length {}, expected {}", rhs.len(), self.u.nrows())));
        }
        let beta = self.u.adjoint() * rhs;
        let filtered = CVector::from_iterator(
            beta.len(),
            beta.iter().zip(&self.sigma).map(|(b, s)| b * (s / (s * s + alpha))),
        );
        let g = self.v_t.adjoint() * filtered;
        Ok((g, self.residual(rhs, &beta, alpha)))
    }

    fn residual(&self, rhs: &CVector, beta: &CVector, alpha: f64) -> f64 {
        let in_range: f64 = beta
            .iter()
            .zip(&self.sigma)
            .map(|(b, s)| (alpha / (s * s + alpha)).powi(2) * b.norm_sqr())
            .sum();
        let outside = (rhs.norm_squared() - beta.norm_squared()).max(0.0);
        (in_range + outside).sqrt()
    }

    /// Residual norm as a function of `α`, without forming `g`.
    pub fn residual_for(&self, rhs: &CVector, alpha: f64) -> f64 {
        let beta = self.u.adjoint() * rhs;
        self.residual(rhs, &beta, alpha)
    }
}

pub fn tikhonov_solve(m: &CMatrix, rhs: &CVector, alpha: f64) -> Result<(CVector, f64)> {
    TikhonovFactor::new(m)?.solve(rhs, alpha)
}

/// `‖(MᴴM + αI)g − Mᴴ rhs‖ / ‖Mᴴ rhs‖`.
pub fn normal_equation_defect(m: &CMatrix, g: &CVector, rhs: &CVector, alpha: f64) -> f64 {
    let mh_rhs = m.adjoint() * rhs;
    let lhs = m.adjoint() * (m * g) + g * Complex64::from(alpha);
    (lhs - &mh_rhs).norm() / mh_rhs.norm().max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum RegularizationPolicy {
    /// `α = ρ σ_max²`.
    Fixed { rho: f64 },
    /// Discrepancy principle `‖Mg − rhs‖ = τ δ ‖rhs‖`; falls back to `Fixed { rho }` when `δ = 0`.
    Morozov { tau: f64, noise_level: f64, rho: f64 },
}

impl Default for RegularizationPolicy {
    fn default() -> Self {
        RegularizationPolicy::Fixed { rho: 1e-6 }
    }
}

impl RegularizationPolicy {
    pub fn alpha(&self, factor: &TikhonovFactor, rhs: &CVector) -> f64 {
        let smax2 = factor.sigma_max().powi(2).max(f64::MIN_POSITIVE);
        match *self {
            RegularizationPolicy::Fixed { rho } => rho * smax2,
            RegularizationPolicy::Morozov { tau, noise_level, rho } => {
                if noise_level <= 0.0 {
                    return rho * smax2;
                }
                let target = tau * noise_level * rhs.norm();
                let (mut lo, mut hi) = ((1e-16 * smax2).ln(), (1e4 * smax2).ln());
                if factor.residual_for(rhs, lo.exp()) >= target {
                    return lo.exp();
                }
                if factor.residual_for(rhs, hi.exp()) <= target {
                    return hi.exp();
                }
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if factor.residual_for(rhs, mid.exp()) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (0.5 * (lo + hi)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub points: Vec<Vec3>,
    pub polarizations: [Vec3; 3],
    pub r_max: f64,
    pub seed: u64,
}

impl ProbeSet {
    /// `count` points uniform in the ball of radius `r_max` (rejection sampling).
    pub fn random(count: usize, r_max: f64, seed: u64) -> Result<Self> {
        if !(r_max > 0.0 && r_max < 1.0) {
            return Err(Error::InvalidInput(format!("probe radius must lie in (0, 1), got {r_max}")));
        }
        if count == 0 {
            return Err(Error::InvalidInput("need at least one probe".into()));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(count);
        while points.len() < count {
            let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if v.norm_squared() <= 1.0 {
                points.push(v * r_max);
            }
        }
        Ok(Self::from_points(points, r_max, seed))
    }

    pub fn from_points(points: Vec<Vec3>, r_max: f64, seed: u64) -> Self {
        Self { points, polarizations: [Vec3::x(), Vec3::y(), Vec3::z()], r_max, seed }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Right-hand sides of the far-field equation for every probe and polarization.
pub fn probe_rhs(m: &FarFieldMatrix, probes: &ProbeSet) -> Vec<CVector> {
    let mut out = Vec::with_capacity(3 * probes.len());
    for z in &probes.points {
        for q in &probes.polarizations {
            out.push(sample_kernel(&m.grid, &m.rows, |x| dipole_far_field(x, z, q, m.kappa)));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorCurve {
    pub lambdas: Vec<Complex64>,
    pub indicator: Vec<f64>,
    pub residual_mean: Vec<f64>,
    pub alpha: Vec<f64>,
    pub valid: Vec<bool>,
}

impl IndicatorCurve {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Indicator with invalid entries linearly interpolated from valid neighbours.
    pub fn filled(&self) -> Vec<f64> {
        let valid: Vec<usize> = (0..self.len()).filter(|&i| self.valid[i]).collect();
        (0..self.len())
            .map(|i| {
                if self.valid[i] || valid.is_empty() {
                    return self.indicator[i];
                }
                let left = valid.iter().rev().find(|&&j| j < i);
                let right = valid.iter().find(|&&j| j > i);
                match (left, right) {
                    (Some(&l), Some(&r)) => {
                        let t = (i - l) as f64 / (r - l) as f64;
                        self.indicator[l] * (1.0 - t) + self.indicator[r] * t
                    }
                    (Some(&l), None) => self.indicator[l],
                    (None, Some(&r)) => self.indicator[r],
                    (None, None) => unreachable!(),
                }
            })
            .collect()
    }

    pub fn median(&self) -> f64 {
        median(&self.filled())
    }
}

pub fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Result of solving the far-field equation for all probes at one operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeAverage {
    pub indicator: f64,
    pub residual_mean: f64,
    pub alpha: f64,
}

/// Mean Tikhonov solution norm over the given right-hand sides.
pub fn probe_average(m: &CMatrix, rhs: &[CVector], policy: &RegularizationPolicy) -> Result<ProbeAverage> {
    let factor = TikhonovFactor::new(m)?;
    let mut norm_sum = 0.0;
    let mut res_sum = 0.0;
    let mut alpha_sum = 0.0;
    for b in rhs {
        let alpha = policy.alpha(&factor, b);
        let (g, r) = factor.solve(b, alpha)?;
        norm_sum += g.norm();
        res_sum += r;
        alpha_sum += alpha;
    }
    let k = rhs.len() as f64;
    Ok(ProbeAverage { indicator: norm_sum / k, residual_mean: res_sum / k, alpha: alpha_sum / k })
}

/// Scans `λ`, solving `(F − F^{(λ)}) g = E_dipole` for every probe.
///
/// Failures at individual `λ` (for instance auxiliary poles) mark the entry invalid.
pub fn scan_indicator(
    f_data: &FarFieldMatrix,
    lambdas: &[Complex64],
    probes: &ProbeSet,
    assembler: &LambdaAssembler,
    cache: Option<&LambdaCache>,
    policy: &RegularizationPolicy,
) -> Result<IndicatorCurve> {
    if assembler.factors.kappa != f_data.kappa || assembler.grid.nodes != f_data.grid.nodes {
        return Err(Error::GridMismatch("data operator and auxiliary assembler disagree".into()));
    }
    let rhs = probe_rhs(f_data, probes);
    let results: Vec<Result<ProbeAverage>> = lambdas
        .par_iter()
        .map(|&lambda| {
            let fl = match cache {
                Some(c) => c.get_or_assemble(assembler, lambda)?,
                None => assembler.assemble(lambda)?,
            };
            let m = modified_operator(f_data, &fl)?;
            probe_average(&m.entries, &rhs, policy)
        })
        .collect();
    let mut curve = IndicatorCurve {
        lambdas: lambdas.to_vec(),
        indicator: Vec::with_capacity(lambdas.len()),
        residual_mean: Vec::with_capacity(lambdas.len()),
        alpha: Vec::with_capacity(lambdas.len()),
        valid: Vec::with_capacity(lambdas.len()),
    };
    for (lambda, r) in lambdas.iter().zip(results) {
        match r {
            Ok(p) => {
                curve.indicator.push(p.indicator);
                curve.residual_mean.push(p.residual_mean);
                curve.alpha.push(p.alpha);
                curve.valid.push(true);
            }
            Err(e) => {
                log::warn!("lambda {lambda}: {e}");
                curve.indicator.push(f64::NAN);
                curve.residual_mean.push(f64::NAN);
                curve.alpha.push(f64::NAN);
                curve.valid.push(false);
            }
        }
    }
    Ok(curve)
}

/// Uniform real grid of `count` samples on `[min, max]`, shifted by `i·im`.
pub fn lambda_grid(min: f64, max: f64, count: usize, im: f64) -> Result<Vec<Complex64>> {
    if count < 2 || !(max > min) {
        return Err(Error::InvalidInput(format!("bad lambda grid [{min}, {max}] with {count} samples")));
    }
    let step = (max - min) / (count - 1) as f64;
    Ok((0..count).map(|i| Complex64::new(min + step * i as f64, im)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakList {
    pub indices: Vec<usize>,
    pub locations: Vec<Complex64>,
    pub heights: Vec<f64>,
    pub prominences: Vec<f64>,
    /// Full width at half prominence, in units of `Re λ`.
    pub widths: Vec<f64>,
}

fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < x.len() {
        if x[i - 1] < x[i] {
            let mut ahead = i + 1;
            while ahead + 1 < x.len() && x[ahead] == x[i] {
                ahead += 1;
            }
            if x[ahead] < x[i] {
                out.push((i + ahead - 1) / 2);
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    out
}

fn prominence(x: &[f64], p: usize) -> f64 {
    let h = x[p];
    let mut left_min = h;
    for i in (0..p).rev() {
        if x[i] > h {
            break;
        }
        left_min = left_min.min(x[i]);
    }
    let mut right_min = h;
    for &v in &x[p + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

fn half_width(x: &[f64], pos: &[f64], p: usize, prom: f64) -> f64 {
    let level = x[p] - 0.5 * prom;
    let mut i = p;
    while i > 0 && x[i] > level {
        i -= 1;
    }
    let left = if x[i] <= level && i < p {
        pos[i] + (level - x[i]) / (x[i + 1] - x[i]) * (pos[i + 1] - pos[i])
    } else {
        pos[i]
    };
    let mut j = p;
    while j + 1 < x.len() && x[j] > level {
        j += 1;
    }
    let right = if x[j] <= level && j > p {
        pos[j] - (level - x[j]) / (x[j - 1] - x[j]) * (pos[j] - pos[j - 1])
    } else {
        pos[j]
    };
    right - left
}

/// Local maxima whose prominence is at least `prominence_factor × median`.
pub fn detect_peaks(c: &IndicatorCurve, prominence_factor: f64) -> PeakList {
    let x = c.filled();
    let mut out = PeakList { indices: vec![], locations: vec![], heights: vec![], prominences: vec![], widths: vec![] };
    if x.len() < 3 || x.iter().any(|v| !v.is_finite()) {
        return out;
    }
    let threshold = prominence_factor * median(&x);
    let pos: Vec<f64> = c.lambdas.iter().map(|l| l.re).collect();
    for p in local_maxima(&x) {
        let prom = prominence(&x, p);
        if prom >= threshold && prom > 0.0 {
            out.indices.push(p);
            out.locations.push(c.lambdas[p]);
            out.heights.push(x[p]);
            out.prominences.push(prom);
            out.widths.push(half_width(&x, &pos, p, prom));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn curve(values: Vec<f64>) -> IndicatorCurve {
        let n = values.len();
        IndicatorCurve {
            lambdas: (0..n).map(|i| c(i as f64 / (n - 1) as f64, 0.0)).collect(),
            indicator: values,
            residual_mean: vec![0.0; n],
            alpha: vec![0.0; n],
            valid: vec![true; n],
        }
    }

    #[test]
    fn dipole_examples() {
        let k = 1.9;
        let x = Vec3::new(0.0, 0.0, 1.0);
        let q = Vec3::new(1.0, 0.0, 0.0);
        let e = dipole_far_field(&x, &Vec3::zeros(), &q, k);
        let expected = cvec(&x.cross(&q).cross(&x)) * c(0.0, k / (4.0 * PI));
        assert!((e - expected).norm() < 1e-15);
        assert_eq!(dipole_far_field(&x, &Vec3::new(0.1, 0.2, 0.3), &x, k).norm(), 0.0);
        let q = Vec3::new(1.0, 0.0, 1.0);
        let e = dipole_far_field(&x, &Vec3::new(0.3, -0.2, 0.5), &q, k);
        assert!((e.norm() - k / (4.0 * PI) * q.norm() * (PI / 4.0).sin()).abs() < 1e-14);
        assert!(cvec(&x).dot(&e).norm() < 1e-14);
    }

    #[test]
    fn scalar_tikhonov() {
        let m = CMatrix::identity(4, 4);
        let b = CVector::from_vec(vec![c(1.0, 2.0), c(-1.0, 0.0), c(0.0, 3.0), c(0.5, 0.5)]);
        let (g, _) = tikhonov_solve(&m, &b, 0.25).unwrap();
        assert!((g - &b / c(1.25, 0.0)).norm() < 1e-14);
        assert!(tikhonov_solve(&m, &b, 0.0).is_err());
    }

    #[test]
    fn gaussian_bumps_give_three_peaks() {
        let centers = [0.2, 0.5, 0.8];
        let v: Vec<f64> = (0..301)
            .map(|i| {
                let t = i as f64 / 300.0;
                1.0 + centers.iter().map(|c| 5.0 * (-((t - c) / 0.02).powi(2)).exp()).sum::<f64>()
            })
            .collect();
        let p = detect_peaks(&curve(v), 2.0);
        assert_eq!(p.indices.len(), 3);
        for (l, c) in p.locations.iter().zip(centers) {
            assert!((l.re - c).abs() < 1e-9);
        }
        // FWHM of exp(−(t/s)²) is 2 s √ln 2
        for w in &p.widths {
            assert!((w - 2.0 * 0.02 * 2f64.ln().sqrt()).abs() < 2e-3, "{w}");
        }
    }

    #[test]
    fn monotone_curve_has_no_peaks() {
        let p = detect_peaks(&curve((0..50).map(|i| i as f64).collect()), 2.0);
        assert!(p.indices.is_empty());
    }

    #[test]
    fn invalid_entries_are_interpolated() {
        let mut cv = curve(vec![1.0, 2.0, 3.0, 4.0]);
        cv.valid[1] = false;
        cv.indicator[1] = f64::NAN;
        assert_eq!(cv.filled(), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn probes_lie_in_ball_and_are_seeded() {
        let a = ProbeSet::random(15, 0.9, 3).unwrap();
        let b = ProbeSet::random(15, 0.9, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.points.iter().all(|p| p.norm() <= 0.9));
        assert!(ProbeSet::random(15, 1.0, 3).is_err());
    }

    #[test]
    fn lambda_grid_endpoints() {
        let g = lambda_grid(-0.5, 1.0, 501, 0.0).unwrap();
        assert_eq!(g.len(), 501);
        assert_eq!(g[0], c(-0.5, 0.0));
        assert!((g[500].re - 1.0).abs() < 1e-15);
        assert!((g[1].re - g[0].re - 0.003).abs() < 1e-15);
    }
}
