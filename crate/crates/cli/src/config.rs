//! Run configuration, read from JSON. Every field has a default matching the
//! closed-sphere reference experiment.

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use screensig_core::farfield::NoiseDistribution;
use screensig_core::inversion::RegularizationPolicy;
use screensig_core::{default_truncation, DirectionGrid, NoiseSpec, SurfaceTensor, Vec3};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kappa: f64,
    pub sigma: SigmaConfig,
    /// Highest degree kept; `null` means `ceil(κ) + 15`.
    pub truncation: Option<usize>,
    pub grid: GridConfig,
    pub lambda_grid: LambdaGridConfig,
    pub noise: NoiseConfig,
    pub probes: ProbeConfig,
    pub tikhonov: TikhonovConfig,
    pub incident: IncidentConfig,
    pub trace: TraceConfig,
    pub peaks: PeaksConfig,
    pub cache_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SigmaConfig {
    pub a_re: f64,
    pub a_im: f64,
    pub b_re: f64,
    pub b_im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aperture {
    Full,
    UpperHemisphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_polar: usize,
    pub n_azimuth: usize,
    pub receivers: Aperture,
    pub transmitters: Aperture,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaGridConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub level: f64,
    pub seed: u64,
    pub distribution: NoiseDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub count: usize,
    pub r_max: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Fixed,
    Morozov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TikhonovConfig {
    pub policy: PolicyKind,
    pub rho: f64,
    pub tau: f64,
}

/// Plane wave used by `forward`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncidentConfig {
    pub direction: [f64; 3],
    pub polarization: [f64; 3],
}

/// Family `Σ(s) = (a, s·b)` for `s` on a uniform grid, used by `trace`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    pub s_min: f64,
    pub s_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeaksConfig {
    pub prominence_factor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kappa: 1.9,
            sigma: SigmaConfig::default(),
            truncation: None,
            grid: GridConfig::default(),
            lambda_grid: LambdaGridConfig::default(),
            noise: NoiseConfig::default(),
            probes: ProbeConfig::default(),
            tikhonov: TikhonovConfig::default(),
            incident: IncidentConfig::default(),
            trace: TraceConfig::default(),
            peaks: PeaksConfig::default(),
            cache_dir: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl Default for SigmaConfig {
    fn default() -> Self {
        Self { a_re: 0.0, a_im: 0.5, b_re: 0.0, b_im: 0.0 }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_polar: 8, n_azimuth: 12, receivers: Aperture::Full, transmitters: Aperture::Full }
    }
}

impl Default for LambdaGridConfig {
    fn default() -> Self {
        Self { min: -0.5, max: 1.0, count: 501, im: 0.0 }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { level: 0.0015, seed: 1, distribution: NoiseDistribution::default() }
    }
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { count: 15, r_max: 0.9, seed: 2 }
    }
}

impl Default for TikhonovConfig {
    fn default() -> Self {
        Self { policy: PolicyKind::Fixed, rho: 1e-6, tau: 1.5 }
    }
}

impl Default for IncidentConfig {
    fn default() -> Self {
        Self { direction: [0.0, 0.0, 1.0], polarization: [1.0, 0.0, 0.0] }
    }
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { s_min: 0.0, s_max: 1.0, steps: 21 }
    }
}

impl Default for PeaksConfig {
    fn default() -> Self {
        Self { prominence_factor: 2.0 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            bail!("kappa must be positive");
        }
        if self.grid.n_polar < 2 || self.grid.n_azimuth < 3 {
            bail!("grid needs at least 2 polar rings and 3 meridians");
        }
        if self.lambda_grid.count < 2 || !(self.lambda_grid.max > self.lambda_grid.min) {
            bail!("lambda_grid needs count >= 2 and max > min");
        }
        if !(0.0..1.0).contains(&self.noise.level) {
            bail!("noise level must lie in [0, 1)");
        }
        if self.probes.count == 0 || !(self.probes.r_max > 0.0 && self.probes.r_max < 1.0) {
            bail!("probes need count >= 1 and r_max in (0, 1)");
        }
        if !(self.tikhonov.rho > 0.0) || !(self.tikhonov.tau > 0.0) {
            bail!("tikhonov rho and tau must be positive");
        }
        if self.trace.steps < 1 {
            bail!("trace needs at least one step");
        }
        Ok(())
    }

    pub fn override_seeds(&mut self, seed: u64) {
        self.noise.seed = seed;
        self.probes.seed = seed.wrapping_add(1);
    }

    pub fn sigma(&self) -> SurfaceTensor {
        let s = self.sigma;
        SurfaceTensor::new(Complex64::new(s.a_re, s.a_im), Complex64::new(s.b_re, s.b_im))
    }

    pub fn nmax(&self) -> usize {
        self.truncation.unwrap_or_else(|| default_truncation(self.kappa))
    }

    pub fn grid(&self) -> Result<DirectionGrid> {
        let g = DirectionGrid::product_gauss(self.grid.n_polar, self.grid.n_azimuth)?;
        let mask = |a: Aperture| match a {
            Aperture::Full => None,
            Aperture::UpperHemisphere => Some(g.upper_hemisphere()),
        };
        let (r, t) = (mask(self.grid.receivers), mask(self.grid.transmitters));
        Ok(g.with_masks(r, t)?)
    }

    pub fn noise_spec(&self) -> Result<NoiseSpec> {
        let mut spec = NoiseSpec::new(self.noise.level, self.noise.seed)?;
        spec.distribution = self.noise.distribution;
        Ok(spec)
    }

    pub fn policy(&self) -> RegularizationPolicy {
        match self.tikhonov.policy {
            PolicyKind::Fixed => RegularizationPolicy::Fixed { rho: self.tikhonov.rho },
            PolicyKind::Morozov => RegularizationPolicy::Morozov {
                tau: self.tikhonov.tau,
                noise_level: self.noise.level,
                rho: self.tikhonov.rho,
            },
        }
    }

    pub fn incident(&self) -> (Vec3, Vec3) {
        (Vec3::from(self.incident.direction), Vec3::from(self.incident.polarization))
    }
}
