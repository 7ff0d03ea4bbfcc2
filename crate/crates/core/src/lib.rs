//! Spectral laboratory for thin anisotropic impedance screens on the unit sphere.
//!
//! The crate solves the forward transmission problem for a closed spherical
//! screen, the Σ-independent auxiliary impedance problem, assembles discrete
//! far-field operators on direction grids, scans Tikhonov-regularised
//! far-field equations for peaks, and computes Σ-Steklov eigenvalues of the
//! ball directly, so that the detected peaks can be checked against ground
//! truth.
//!
//! Module map:
//!
//! * [`specfun`] – Bessel/Hankel functions and vector spherical harmonics.
//! * [`tensor`] – surface conductivity tensors and admissibility checks.
//! * [`mie`] – exact per-mode solution of the screen problem.
//! * [`auxiliary`] – the smoothing projection `S` and the auxiliary problem.
//! * [`grid`], [`farfield`] – direction grids, far-field operators, noise, I/O.
//! * [`inversion`] – Tikhonov solves, indicator scans and peak detection.
//! * [`eigs`] – closed-form Σ-Steklov eigenvalues on the ball.

use num_complex::Complex64;

pub mod auxiliary;
pub mod eigs;
pub mod farfield;
pub mod grid;
pub mod inversion;
pub mod mie;
pub mod specfun;
pub mod tensor;

pub use auxiliary::{AuxModeSolution, AuxParameter};
pub use eigs::{EigenvalueSet, Window};
pub use farfield::{FarFieldMatrix, NoiseSpec, OperatorKind};
pub use grid::{DirectionGrid, GridKind};
pub use inversion::{IndicatorCurve, PeakList, ProbeSet, RegularizationPolicy};
pub use mie::{FieldExpansion, PlaneWave, Side};
pub use specfun::{Family, ModeKey, RadialPair};
pub use tensor::{AdmissibilityReport, GeneralTensor2, SurfaceTensor};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type CVec3 = nalgebra::Vector3<Complex64>;
pub type CMatrix = nalgebra::DMatrix<Complex64>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("mode block n={n} is near-singular (condition number {condition:.3e})")]
    SingularMode { n: usize, condition: f64 },
    #[error("auxiliary problem has a pole at n={n}, lambda={lambda}")]
    AuxPole { n: usize, lambda: Complex64 },
    #[error("interior resonance in mode n={n}: the boundary trace of the mode vanishes")]
    InteriorResonance { n: usize },
    #[error("degenerate mode n={n}: every lambda satisfies the eigen-condition")]
    DegenerateMode { n: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("unsupported grid: {0}")]
    UnsupportedGrid(String),
    #[error("decomposition failed: {0}")]
    Decomposition(String),
    #[error("bad matrix file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn cvec(v: &Vec3) -> CVec3 {
    v.map(Complex64::from)
}

/// Default truncation degree `ceil(κ) + 15`.
pub fn default_truncation(kappa: f64) -> usize {
    kappa.ceil() as usize + 15
}
