//! Quadrature grids on the direction sphere with per-node tangential frames.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::specfun::spherical_frame;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// Gauss–Legendre in `cos θ` times uniform azimuth.
    ProductGauss,
    /// Equal-weight spherical design (octahedron or icosahedron vertices).
    SphericalDesign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionGrid {
    pub kind: GridKind,
    pub nodes: Vec<Vec3>,
    pub weights: Vec<f64>,
    /// `(t₁, t₂) = (θ̂, φ̂)` per node.
    pub frames: Vec<[Vec3; 2]>,
    /// Spherical harmonics up to this degree are integrated exactly.
    pub degree: usize,
    pub n_polar: usize,
    pub n_azimuth: usize,
    pub receiver_mask: Option<Vec<bool>>,
    pub transmitter_mask: Option<Vec<bool>>,
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

impl DirectionGrid {
    fn from_nodes(kind: GridKind, nodes: Vec<Vec3>, weights: Vec<f64>, degree: usize, np: usize, na: usize) -> Result<Self> {
        let frames = nodes
            .iter()
            .map(|d| spherical_frame(d).map(|f| [f.t1, f.t2]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind,
            nodes,
            weights,
            frames,
            degree,
            n_polar: np,
            n_azimuth: na,
            receiver_mask: None,
            transmitter_mask: None,
        })
    }

    /// `n_polar` Gauss–Legendre rings times `n_azimuth` equispaced meridians.
    pub fn product_gauss(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_polar < 1 || n_azimuth < 1 {
            return Err(Error::UnsupportedGrid(format!("{n_polar}x{n_azimuth} product grid")));
        }
        let (x, w) = gauss_legendre(n_polar);
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        let dphi = 2.0 * PI / n_azimuth as f64;
        // rings from the north pole down
        for i in (0..n_polar).rev() {
            let ct = x[i];
            let st = (1.0 - ct * ct).sqrt();
            for k in 0..n_azimuth {
                let phi = k as f64 * dphi;
                nodes.push(Vec3::new(st * phi.cos(), st * phi.sin(), ct).normalize());
                weights.push(w[i] * dphi);
            }
        }
        let degree = (2 * n_polar - 1).min(n_azimuth - 1);
        Self::from_nodes(GridKind::ProductGauss, nodes, weights, degree, n_polar, n_azimuth)
    }

    pub fn octahedron() -> Result<Self> {
        let nodes = vec![
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, -1.0),
        ];
        Self::from_nodes(GridKind::SphericalDesign, nodes, vec![4.0 * PI / 6.0; 6], 3, 0, 0)
    }

    pub fn icosahedron() -> Result<Self> {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let mut nodes = Vec::with_capacity(12);
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                nodes.push(Vec3::new(0.0, s1, s2 * g).normalize());
                nodes.push(Vec3::new(s1, s2 * g, 0.0).normalize());
                nodes.push(Vec3::new(s2 * g, 0.0, s1).normalize());
            }
        }
        Self::from_nodes(GridKind::SphericalDesign, nodes, vec![4.0 * PI / 12.0; 12], 5, 0, 0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn with_masks(mut self, receivers: Option<Vec<bool>>, transmitters: Option<Vec<bool>>) -> Result<Self> {
        for m in receivers.iter().chain(transmitters.iter()) {
            if m.len() != self.len() {
                return Err(Error::GridMismatch(format!("mask of length {} for {} nodes", m.len(), self.len())));
            }
            if !m.iter().any(|&b| b) {
                return Err(Error::InvalidInput("aperture mask selects no nodes".into()));
            }
        }
        self.receiver_mask = receivers;
        self.transmitter_mask = transmitters;
        Ok(self)
    }

    /// Mask of nodes with `z > 0`.
    pub fn upper_hemisphere(&self) -> Vec<bool> {
        self.nodes.iter().map(|d| d.z > 0.0).collect()
    }

    fn active(mask: &Option<Vec<bool>>, n: usize) -> Vec<usize> {
        match mask {
            Some(m) => (0..n).filter(|&i| m[i]).collect(),
            None => (0..n).collect(),
        }
    }

    pub fn receivers(&self) -> Vec<usize> {
        Self::active(&self.receiver_mask, self.len())
    }

    pub fn transmitters(&self) -> Vec<usize> {
        Self::active(&self.transmitter_mask, self.len())
    }

    /// Index of `−d_i` for each node.
    pub fn antipodes(&self) -> Result<Vec<usize>> {
        self.nodes
            .iter()
            .map(|d| {
                self.nodes
                    .iter()
                    .position(|e| (e + d).norm() < 1e-12)
                    .ok_or_else(|| Error::UnsupportedGrid("grid is not antipodally symmetric".into()))
            })
            .collect()
    }

    /// Frame components `c` at node `i` as a 3-vector.
    pub fn tangent(&self, i: usize, c: [num_complex::Complex64; 2]) -> crate::CVec3 {
        crate::cvec(&self.frames[i][0]) * c[0] + crate::cvec(&self.frames[i][1]) * c[1]
    }

    /// Projects a 3-vector onto the frame at node `i`.
    pub fn components(&self, i: usize, v: &crate::CVec3) -> [num_complex::Complex64; 2] {
        [crate::cvec(&self.frames[i][0]).dot(v), crate::cvec(&self.frames[i][1]).dot(v)]
    }
}

/// Builds a grid with `n_dirs` nodes.
///
/// Product grids use `p` polar rings and `3p/2` meridians (`p` even), so 96 is
/// 8×12 and 384 is 16×24. Designs exist for 6 and 12 nodes.
pub fn build_grid(n_dirs: usize, kind: GridKind) -> Result<DirectionGrid> {
    if n_dirs < 6 {
        return Err(Error::UnsupportedGrid(format!("{n_dirs} directions (minimum 6)")));
    }
    match kind {
        GridKind::ProductGauss => {
            let p = ((2 * n_dirs) as f64 / 3.0).sqrt().round() as usize;
            if !p.is_multiple_of(2) || p * (3 * p / 2) != n_dirs {
                return Err(Error::UnsupportedGrid(format!(
                    "{n_dirs} directions is not of the form p*(3p/2) with p even"
                )));
            }
            DirectionGrid::product_gauss(p, 3 * p / 2)
        }
        GridKind::SphericalDesign => match n_dirs {
            6 => DirectionGrid::octahedron(),
            12 => DirectionGrid::icosahedron(),
            _ => Err(Error::UnsupportedGrid(format!("no spherical design with {n_dirs} nodes"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::vsh_all;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        for k in 0..16 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn weights_sum_to_four_pi() {
        for g in [build_grid(96, GridKind::ProductGauss).unwrap(), build_grid(384, GridKind::ProductGauss).unwrap()] {
            let s: f64 = g.weights.iter().sum();
            assert!((s - 4.0 * PI).abs() < 1e-12);
        }
        let g = build_grid(96, GridKind::ProductGauss).unwrap();
        assert_eq!((g.n_polar, g.n_azimuth, g.degree), (8, 12, 11));
    }

    #[test]
    fn unsupported_counts() {
        assert!(build_grid(100, GridKind::ProductGauss).is_err());
        assert!(build_grid(5, GridKind::ProductGauss).is_err());
        assert!(build_grid(20, GridKind::SphericalDesign).is_err());
    }

    #[test]
    fn y32_norm() {
        let g = build_grid(96, GridKind::ProductGauss).unwrap();
        let q: f64 = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(d, w)| w * vsh_all(3, d).unwrap().get(3, 2).y.norm_sqr())
            .sum();
        assert!((q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn designs_integrate_to_their_degree() {
        for (g, deg) in [(DirectionGrid::octahedron().unwrap(), 3), (DirectionGrid::icosahedron().unwrap(), 5)] {
            assert_eq!(g.degree, deg);
            for d in &g.nodes {
                assert!((d.norm() - 1.0).abs() < 1e-14);
            }
            // ∫ Y_n^m = 0 for 1 ≤ n ≤ degree
            for n in 1..=deg {
                for m in -(n as i64)..=(n as i64) {
                    let q: num_complex::Complex64 = g
                        .nodes
                        .iter()
                        .zip(&g.weights)
                        .map(|(d, w)| vsh_all(n, d).unwrap().get(n, m).y * *w)
                        .sum();
                    assert!(q.norm() < 1e-13, "n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn frames_are_orthonormal_and_tangential() {
        let g = build_grid(96, GridKind::ProductGauss).unwrap();
        for (d, f) in g.nodes.iter().zip(&g.frames) {
            assert!(d.dot(&f[0]).abs() < 1e-12 && d.dot(&f[1]).abs() < 1e-12);
            assert!(f[0].dot(&f[1]).abs() < 1e-12);
            assert!((f[0].norm() - 1.0).abs() < 1e-12 && (f[1].norm() - 1.0).abs() < 1e-12);
            assert!((f[0].cross(&f[1]) - d).norm() < 1e-12);
        }
    }

    #[test]
    fn hemisphere_mask_halves_nodes() {
        let g = build_grid(96, GridKind::ProductGauss).unwrap();
        let m = g.upper_hemisphere();
        let g = g.with_masks(Some(m.clone()), Some(m)).unwrap();
        assert_eq!(g.receivers().len(), 48);
        assert_eq!(g.transmitters().len(), 48);
    }

    #[test]
    fn antipodes_exist() {
        for g in [build_grid(96, GridKind::ProductGauss).unwrap(), DirectionGrid::icosahedron().unwrap()] {
            let a = g.antipodes().unwrap();
            for (i, &j) in a.iter().enumerate() {
                assert_eq!(a[j], i);
            }
        }
    }
}
