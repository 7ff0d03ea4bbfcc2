//! Discrete far-field operators on direction grids.
//!
//! A tangential kernel `g` on the grid is stored as `2·n` frame components,
//! `(√w_j g(d_j)·t₁, √w_j g(d_j)·t₂)`. Observations carry the same `√w_i`
//! factor, so the Euclidean norm of a vector approximates the `L²(𝕊)` norm of
//! the field it represents and the discrete adjoint is the conjugate transpose.
//!
//! Every operator factors as `O · T · I`: `I` projects incident polarizations
//! onto regular modes, `T` is the per-mode transfer and `O` synthesizes far
//! fields from radiating coefficients.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::auxiliary::aux_transfers;
use crate::grid::{DirectionGrid, GridKind};
use crate::mie::screen_transfers;
use crate::specfun::{self, mode_count};
use crate::tensor::SurfaceTensor;
use crate::{CMatrix, CVec3, Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const MAGIC: &[u8; 4] = b"FFO1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OperatorKind {
    F,
    FLambda { lambda: Complex64 },
    Modified { lambda: Complex64 },
}

/// How noise entries are drawn before rescaling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDistribution {
    /// Real and imaginary parts i.i.d. uniform on `[−1, 1]`.
    #[default]
    CenteredSquare,
    /// Real and imaginary parts i.i.d. uniform on `[0, 1]`.
    UnitSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub level: f64,
    pub seed: u64,
    #[serde(default)]
    pub distribution: NoiseDistribution,
}

impl NoiseSpec {
    pub fn new(level: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&level) {
            return Err(Error::InvalidInput(format!("noise level must lie in [0, 1), got {level}")));
        }
        Ok(Self { level, seed, distribution: NoiseDistribution::default() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMatrix {
    pub kind: OperatorKind,
    pub kappa: f64,
    pub nmax: usize,
    pub grid: DirectionGrid,
    /// Observation node indices (rows come in frame pairs).
    pub rows: Vec<usize>,
    /// Incident node indices (columns come in frame pairs).
    pub cols: Vec<usize>,
    pub entries: CMatrix,
    pub sigma: Option<SurfaceTensor>,
    pub noise: Option<NoiseSpec>,
}

fn i_pow(n: usize) -> Complex64 {
    [Complex64::new(1.0, 0.0), I, Complex64::new(-1.0, 0.0), -I][n % 4]
}

/// Synthesis and projection factors of a grid, split by family.
#[derive(Debug, Clone)]
pub struct ModalFactors {
    pub kappa: f64,
    pub nmax: usize,
    /// `2·|rows| × K` far-field synthesis from TE (resp. TM) radiating coefficients.
    pub obs_te: CMatrix,
    pub obs_tm: CMatrix,
    /// `K × 2·|cols|` regular coefficients of the weighted frame polarizations.
    pub inc_te: CMatrix,
    pub inc_tm: CMatrix,
}

impl ModalFactors {
    pub fn new(grid: &DirectionGrid, kappa: f64, nmax: usize) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidInput(format!("wave number must be positive, got {kappa}")));
        }
        let rows = grid.receivers();
        let cols = grid.transmitters();
        let k = mode_count(nmax);
        let tables = grid
            .nodes
            .par_iter()
            .map(|d| specfun::vsh_all(nmax, d))
            .collect::<Result<Vec<_>>>()?;
        let degree: Vec<usize> = (0..k).map(|idx| specfun::mode_from_index(idx).0).collect();

        let mut obs_te = CMatrix::zeros(2 * rows.len(), k);
        let mut obs_tm = CMatrix::zeros(2 * rows.len(), k);
        for (r, &i) in rows.iter().enumerate() {
            let s = grid.weights[i].sqrt() / kappa;
            for (idx, v) in tables[i].entries.iter().enumerate() {
                let n = degree[idx];
                let te = i_pow(n + 1).conj() * s;
                let tm = -i_pow(n).conj() * s;
                for a in 0..2 {
                    obs_te[(2 * r + a, idx)] = v.x_frame[a] * te;
                    obs_tm[(2 * r + a, idx)] = v.u_frame[a] * tm;
                }
            }
        }
        let mut inc_te = CMatrix::zeros(k, 2 * cols.len());
        let mut inc_tm = CMatrix::zeros(k, 2 * cols.len());
        for (c, &j) in cols.iter().enumerate() {
            let s = Complex64::new(0.0, 4.0 * PI * kappa * grid.weights[j].sqrt());
            for (idx, v) in tables[j].entries.iter().enumerate() {
                let n = degree[idx];
                for b in 0..2 {
                    inc_te[(idx, 2 * c + b)] = s * i_pow(n) * v.x_frame[b].conj();
                    inc_tm[(idx, 2 * c + b)] = s * i_pow(n + 1) * v.u_frame[b].conj();
                }
            }
        }
        Ok(Self { kappa, nmax, obs_te, obs_tm, inc_te, inc_tm })
    }

    /// `O_f diag(t) I_f` for one family.
    fn diagonal_part(obs: &CMatrix, inc: &CMatrix, t: &[Complex64]) -> CMatrix {
        let mut scaled = inc.clone();
        for (idx, mut row) in scaled.row_iter_mut().enumerate() {
            row *= t[idx];
        }
        obs * scaled
    }
}

fn per_mode<T: Copy>(nmax: usize, per_degree: &[T]) -> Vec<T> {
    (0..mode_count(nmax)).map(|idx| per_degree[specfun::mode_from_index(idx).0 - 1]).collect()
}

/// Far-field operator of the screen problem.
pub fn assemble_f(sigma: &SurfaceTensor, kappa: f64, grid: &DirectionGrid, nmax: usize) -> Result<FarFieldMatrix> {
    let factors = ModalFactors::new(grid, kappa, nmax)?;
    assemble_f_with(&factors, sigma, grid)
}

pub fn assemble_f_with(factors: &ModalFactors, sigma: &SurfaceTensor, grid: &DirectionGrid) -> Result<FarFieldMatrix> {
    let (kappa, nmax) = (factors.kappa, factors.nmax);
    let transfers = per_mode(nmax, &screen_transfers(sigma, kappa, nmax)?);
    let get = |i: usize, k: usize| transfers.iter().map(|t| t.scattered[i][k]).collect::<Vec<_>>();
    let mut entries = ModalFactors::diagonal_part(&factors.obs_te, &factors.inc_te, &get(0, 0));
    entries += ModalFactors::diagonal_part(&factors.obs_te, &factors.inc_tm, &get(0, 1));
    entries += ModalFactors::diagonal_part(&factors.obs_tm, &factors.inc_te, &get(1, 0));
    entries += ModalFactors::diagonal_part(&factors.obs_tm, &factors.inc_tm, &get(1, 1));
    Ok(FarFieldMatrix {
        kind: OperatorKind::F,
        kappa,
        nmax,
        grid: grid.clone(),
        rows: grid.receivers(),
        cols: grid.transmitters(),
        entries,
        sigma: Some(*sigma),
        noise: None,
    })
}

/// Assembles `F^{(λ)}` for many `λ`; the TM part is computed once.
#[derive(Debug, Clone)]
pub struct LambdaAssembler {
    pub factors: ModalFactors,
    pub grid: DirectionGrid,
    tm_part: CMatrix,
}

impl LambdaAssembler {
    pub fn new(kappa: f64, grid: &DirectionGrid, nmax: usize) -> Result<Self> {
        let factors = ModalFactors::new(grid, kappa, nmax)?;
        // the TM transfer does not involve λ
        let tm: Vec<Complex64> = aux_transfers(Complex64::new(0.0, 0.0), kappa, nmax)?.iter().map(|t| t[1]).collect();
        let tm_part = ModalFactors::diagonal_part(&factors.obs_tm, &factors.inc_tm, &per_mode(nmax, &tm));
        Ok(Self { factors, grid: grid.clone(), tm_part })
    }

    pub fn tm_part(&self) -> &CMatrix {
        &self.tm_part
    }

    pub fn te_part(&self, lambda: Complex64) -> Result<CMatrix> {
        let (kappa, nmax) = (self.factors.kappa, self.factors.nmax);
        let te: Vec<Complex64> = aux_transfers(lambda, kappa, nmax)?.iter().map(|t| t[0]).collect();
        Ok(ModalFactors::diagonal_part(&self.factors.obs_te, &self.factors.inc_te, &per_mode(nmax, &te)))
    }

    pub fn assemble(&self, lambda: Complex64) -> Result<FarFieldMatrix> {
        let entries = self.te_part(lambda)? + &self.tm_part;
        Ok(FarFieldMatrix {
            kind: OperatorKind::FLambda { lambda },
            kappa: self.factors.kappa,
            nmax: self.factors.nmax,
            grid: self.grid.clone(),
            rows: self.grid.receivers(),
            cols: self.grid.transmitters(),
            entries,
            sigma: None,
            noise: None,
        })
    }
}

/// Far-field operator of the auxiliary problem with parameter `λ`.
pub fn assemble_f_lambda(lambda: Complex64, kappa: f64, grid: &DirectionGrid, nmax: usize) -> Result<FarFieldMatrix> {
    LambdaAssembler::new(kappa, grid, nmax)?.assemble(lambda)
}

fn same_layout(a: &FarFieldMatrix, b: &FarFieldMatrix) -> Result<()> {
    if a.grid.nodes != b.grid.nodes || a.grid.weights != b.grid.weights || a.rows != b.rows || a.cols != b.cols {
        return Err(Error::GridMismatch("operators live on different grids or apertures".into()));
    }
    if a.entries.shape() != b.entries.shape() {
        return Err(Error::GridMismatch("operator shapes differ".into()));
    }
    if a.kappa != b.kappa {
        return Err(Error::GridMismatch(format!("wave numbers differ: {} vs {}", a.kappa, b.kappa)));
    }
    Ok(())
}

/// `F − F^{(λ)}`.
pub fn modified_operator(f: &FarFieldMatrix, f_lambda: &FarFieldMatrix) -> Result<FarFieldMatrix> {
    same_layout(f, f_lambda)?;
    let lambda = match f_lambda.kind {
        OperatorKind::FLambda { lambda } | OperatorKind::Modified { lambda } => lambda,
        OperatorKind::F => Complex64::new(0.0, 0.0),
    };
    Ok(FarFieldMatrix {
        kind: OperatorKind::Modified { lambda },
        entries: &f.entries - &f_lambda.entries,
        ..f.clone()
    })
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Adds seeded uniform noise scaled to `‖E‖₂ = level·‖M‖₂`.
pub fn add_noise(m: &FarFieldMatrix, spec: &NoiseSpec) -> Result<FarFieldMatrix> {
    if !(spec.level >= 0.0) {
        return Err(Error::InvalidInput(format!("noise level must be nonnegative, got {}", spec.level)));
    }
    let mut out = m.clone();
    out.noise = Some(*spec);
    if spec.level == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let (lo, hi) = match spec.distribution {
        NoiseDistribution::CenteredSquare => (-1.0, 1.0),
        NoiseDistribution::UnitSquare => (0.0, 1.0),
    };
    let (r, c) = m.entries.shape();
    // row-major draw order, independent of storage layout
    let mut e = CMatrix::zeros(r, c);
    for i in 0..r {
        for j in 0..c {
            e[(i, j)] = Complex64::new(rng.random_range(lo..=hi), rng.random_range(lo..=hi));
        }
    }
    let en = spectral_norm(&e);
    let mn = spectral_norm(&m.entries);
    if en > 0.0 {
        e *= Complex64::from(spec.level * mn / en);
    }
    out.entries += e;
    Ok(out)
}

/// Real signed block permutation realizing `g ↦ g(−·)` in node frames.
pub fn flip_matrix(grid: &DirectionGrid, nodes: &[usize]) -> Result<DMatrix<f64>> {
    let anti = grid.antipodes()?;
    let pos = |node: usize| nodes.iter().position(|&x| x == node);
    let mut r = DMatrix::zeros(2 * nodes.len(), 2 * nodes.len());
    for (p, &i) in nodes.iter().enumerate() {
        let q = pos(anti[i]).ok_or_else(|| Error::GridMismatch("aperture is not antipodally closed".into()))?;
        for a in 0..2 {
            for c in 0..2 {
                r[(2 * p + a, 2 * q + c)] = grid.frames[i][a].dot(&grid.frames[anti[i]][c]);
            }
        }
    }
    Ok(r)
}

/// `‖F^H − C R F_T R C‖₂ / ‖F‖₂` where `F_T` is the operator of the transposed problem.
pub fn adjoint_defect(f: &FarFieldMatrix, f_transposed: &FarFieldMatrix) -> Result<f64> {
    same_layout(f, f_transposed)?;
    if f.rows != f.cols {
        return Err(Error::GridMismatch("adjoint identity needs identical receiver and transmitter sets".into()));
    }
    let r_out = flip_matrix(&f.grid, &f.rows)?.map(Complex64::from);
    let r_in = flip_matrix(&f.grid, &f.cols)?.map(Complex64::from);
    let flipped = (&r_in * &f_transposed.entries * &r_out).map(|z| z.conj());
    let d = f.entries.adjoint() - flipped;
    Ok(spectral_norm(&d) / spectral_norm(&f.entries))
}

/// Weighted frame components of a tangential kernel sampled at the given nodes.
pub fn sample_kernel(grid: &DirectionGrid, nodes: &[usize], g: impl Fn(&crate::Vec3) -> CVec3) -> nalgebra::DVector<Complex64> {
    let mut v = nalgebra::DVector::zeros(2 * nodes.len());
    for (p, &i) in nodes.iter().enumerate() {
        let c = grid.components(i, &g(&grid.nodes[i]));
        let s = grid.weights[i].sqrt();
        v[2 * p] = c[0] * s;
        v[2 * p + 1] = c[1] * s;
    }
    v
}

// ---------------------------------------------------------------- file format

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn encode_ffo1(m: &CMatrix) -> Result<Vec<u8>> {
    let (r, c) = m.shape();
    let (r32, c32) = (
        u32::try_from(r).map_err(|_| Error::Format("too many rows".into()))?,
        u32::try_from(c).map_err(|_| Error::Format("too many columns".into()))?,
    );
    let mut out = Vec::with_capacity(12 + 16 * r * c);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&r32.to_le_bytes());
    out.extend_from_slice(&c32.to_le_bytes());
    for i in 0..r {
        for j in 0..c {
            out.extend_from_slice(&m[(i, j)].re.to_le_bytes());
            out.extend_from_slice(&m[(i, j)].im.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_ffo1(bytes: &[u8]) -> Result<CMatrix> {
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing FFO1 header".into()));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap()) as usize;
    let (r, c) = (word(4), word(8));
    if bytes.len() != 12 + 16 * r * c {
        return Err(Error::Format(format!("expected {} bytes for {r}x{c}, found {}", 12 + 16 * r * c, bytes.len())));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
    Ok(CMatrix::from_fn(r, c, |i, j| {
        let k = 12 + 16 * (i * c + j);
        Complex64::new(f(k), f(k + 8))
    }))
}

pub fn write_ffo1(path: &Path, m: &CMatrix) -> Result<()> {
    write_atomic(path, &encode_ffo1(m)?)
}

pub fn read_ffo1(path: &Path) -> Result<CMatrix> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_ffo1(&bytes)
}

/// Sidecar metadata stored next to a matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldMeta {
    pub kind: OperatorKind,
    pub kappa: f64,
    pub nmax: usize,
    pub sigma: Option<SurfaceTensor>,
    pub noise: Option<NoiseSpec>,
    pub grid: DirectionGrid,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

impl FarFieldMatrix {
    pub fn meta(&self) -> FarFieldMeta {
        FarFieldMeta {
            kind: self.kind,
            kappa: self.kappa,
            nmax: self.nmax,
            sigma: self.sigma,
            noise: self.noise,
            grid: self.grid.clone(),
            rows: self.rows.clone(),
            cols: self.cols.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_ffo1(path, &self.entries)?;
        write_atomic(&sidecar_path(path), serde_json::to_string_pretty(&self.meta())?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let entries = read_ffo1(path)?;
        let meta: FarFieldMeta = serde_json::from_slice(&std::fs::read(sidecar_path(path))?)?;
        if entries.shape() != (2 * meta.rows.len(), 2 * meta.cols.len()) {
            return Err(Error::Format("matrix shape disagrees with its sidecar".into()));
        }
        Ok(Self {
            kind: meta.kind,
            kappa: meta.kappa,
            nmax: meta.nmax,
            grid: meta.grid,
            rows: meta.rows,
            cols: meta.cols,
            entries,
            sigma: meta.sigma,
            noise: meta.noise,
        })
    }

    pub fn lambda(&self) -> Option<Complex64> {
        match self.kind {
            OperatorKind::F => None,
            OperatorKind::FLambda { lambda } | OperatorKind::Modified { lambda } => Some(lambda),
        }
    }
}

/// On-disk cache of `F^{(λ)}`, one file per `(κ, N, grid, λ)`.
#[derive(Debug, Clone)]
pub struct LambdaCache {
    pub dir: PathBuf,
}

fn grid_tag(grid: &DirectionGrid) -> String {
    let kind = match grid.kind {
        GridKind::ProductGauss => "pg",
        GridKind::SphericalDesign => "sd",
    };
    let mask = |m: &Option<Vec<bool>>| match m {
        None => "all".to_string(),
        Some(v) => {
            let mut h: u64 = 0xcbf2_9ce4_8422_2325;
            for &b in v {
                h = (h ^ b as u64).wrapping_mul(0x100_0000_01b3);
            }
            format!("{h:016x}")
        }
    };
    format!(
        "{kind}{}x{}n{}_{}_{}",
        grid.n_polar,
        grid.n_azimuth,
        grid.len(),
        mask(&grid.receiver_mask),
        mask(&grid.transmitter_mask)
    )
}

impl LambdaCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path(&self, kappa: f64, nmax: usize, grid: &DirectionGrid, lambda: Complex64) -> PathBuf {
        self.dir.join(format!(
            "flambda_k{:016x}_n{nmax}_{}_l{:016x}_{:016x}.ffo",
            kappa.to_bits(),
            grid_tag(grid),
            lambda.re.to_bits(),
            lambda.im.to_bits()
        ))
    }

    /// Loads a cached operator or assembles and stores it.
    pub fn get_or_assemble(&self, assembler: &LambdaAssembler, lambda: Complex64) -> Result<FarFieldMatrix> {
        let path = self.path(assembler.factors.kappa, assembler.factors.nmax, &assembler.grid, lambda);
        if path.exists() {
            match FarFieldMatrix::load(&path) {
                Ok(m) => return Ok(m),
                Err(e) => log::warn!("ignoring unreadable cache entry {}: {e}", path.display()),
            }
        }
        let m = assembler.assemble(lambda)?;
        m.save(&path)?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small_grid() -> DirectionGrid {
        DirectionGrid::product_gauss(4, 6).unwrap()
    }

    #[test]
    fn zero_screen_gives_zero_operator() {
        let f = assemble_f(&SurfaceTensor::zero(), 1.9, &small_grid(), 10).unwrap();
        assert!(f.entries.iter().all(|z| *z == ZERO));
        assert_eq!(f.entries.shape(), (48, 48));
    }

    #[test]
    fn ffo1_roundtrip_is_bitwise() {
        let m = CMatrix::from_fn(3, 5, |i, j| c(i as f64 * 0.1 + 1e-300, -(j as f64) / 3.0));
        let b = encode_ffo1(&m).unwrap();
        assert_eq!(&b[..4], b"FFO1");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 3);
        assert_eq!(b.len(), 12 + 16 * 15);
        let back = decode_ffo1(&b).unwrap();
        for (x, y) in m.iter().zip(back.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
        assert!(decode_ffo1(&b[..20]).is_err());
        assert!(decode_ffo1(b"NOPE00000000").is_err());
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let f = assemble_f_lambda(c(0.25, 0.0), 1.9, &small_grid(), 8).unwrap();
        let p = dir.path().join("m.ffo");
        f.save(&p).unwrap();
        let g = FarFieldMatrix::load(&p).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn modified_requires_same_grid() {
        let a = assemble_f_lambda(c(0.25, 0.0), 1.9, &small_grid(), 6).unwrap();
        let b = assemble_f_lambda(c(0.25, 0.0), 1.9, &build_grid(96, GridKind::ProductGauss).unwrap(), 6).unwrap();
        assert!(matches!(modified_operator(&a, &b), Err(Error::GridMismatch(_))));
        let z = modified_operator(&a, &a).unwrap();
        assert!(z.entries.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn noise_level_and_determinism() {
        let f = assemble_f(&SurfaceTensor::new(c(0.0, 0.5), ZERO), 1.9, &small_grid(), 10).unwrap();
        let spec = NoiseSpec::new(0.0015, 7).unwrap();
        let a = add_noise(&f, &spec).unwrap();
        let b = add_noise(&f, &spec).unwrap();
        assert_eq!(a.entries, b.entries);
        let rel = spectral_norm(&(&a.entries - &f.entries)) / spectral_norm(&f.entries);
        assert!((rel - 0.0015).abs() < 1e-12);
        let z = add_noise(&f, &NoiseSpec::new(0.0, 7).unwrap()).unwrap();
        assert_eq!(z.entries, f.entries);
        assert!(NoiseSpec::new(1.0, 0).is_err());
    }

    #[test]
    fn flip_is_an_involution() {
        let g = small_grid();
        let nodes = g.receivers();
        let r = flip_matrix(&g, &nodes).unwrap();
        assert!((&r * &r - DMatrix::identity(r.nrows(), r.ncols())).norm() < 1e-12);
    }
}
