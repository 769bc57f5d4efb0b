//! Dense spectral kernels: complex Schur-style eigenvalues and a
//! Golub-Kahan SVD, written against a split-storage row-major matrix type.
//!
//! Everything here is self-contained so results are bit-reproducible across
//! machines with the same float semantics; no external linear algebra
//! library is linked. The backend trait exposes exactly the two dense calls
//! the rest of the crate needs, so a faster implementation can be swapped in
//! behind it without touching callers.

pub mod cmat;
mod eigen;
pub mod resolvent;
mod svd;

pub use cmat::CMat;
pub use resolvent::{
    assemble_resolvent, resolvent_quadratic_form, resolvent_trace, ward_residual,
    HermitizedSpectrum, ResolventView,
};
pub use svd::SvdFactors;

use crate::ensemble::MatrixSample;
use num_complex::Complex64;

#[derive(Debug)]
pub enum SpectralError {
    /// Iteration cap hit while deflating the given trailing index.
    NonConvergence { index: usize },
    DimensionMismatch { expected: usize, got: usize },
    NonPositiveEta { eta: f64 },
}

impl std::fmt::Display for SpectralError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpectralError::NonConvergence { index } => {
                write!(f, "iteration failed to deflate index {index}")
            }
            SpectralError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            SpectralError::NonPositiveEta { eta } => {
                write!(f, "spectral parameter eta = {eta} must be positive")
            }
        }
    }
}

impl std::error::Error for SpectralError {}

/// Eigenvalues of one draw, unordered beyond the solver's deflation order.
pub struct ComplexSpectrum {
    pub sigma: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn n(&self) -> usize {
        self.sigma.len()
    }
}

/// The two dense factorizations everything downstream is built on.
pub trait SpectralBackend {
    fn eigenvalues(&self, a: &CMat) -> Result<Vec<Complex64>, SpectralError>;
    fn svd(&self, a: &CMat, want_factors: bool) -> Result<SvdFactors, SpectralError>;
}

/// The built-in kernels.
pub struct InRepoBackend;

impl SpectralBackend for InRepoBackend {
    fn eigenvalues(&self, a: &CMat) -> Result<Vec<Complex64>, SpectralError> {
        eigen::eigenvalues(a)
    }

    fn svd(&self, a: &CMat, want_factors: bool) -> Result<SvdFactors, SpectralError> {
        svd::svd(a, want_factors)
    }
}

/// X - z, the matrix whose singular values drive the Hermitization.
pub fn shifted_matrix(x: &MatrixSample, z: Complex64) -> CMat {
    let n = x.n();
    let mut a = x.entries.clone();
    for i in 0..n {
        a.set(i, i, a.get(i, i) - z);
    }
    a
}

pub fn complex_eigenvalues_with(
    backend: &dyn SpectralBackend,
    x: &MatrixSample,
) -> Result<ComplexSpectrum, SpectralError> {
    Ok(ComplexSpectrum { sigma: backend.eigenvalues(&x.entries)? })
}

pub fn complex_eigenvalues(x: &MatrixSample) -> Result<ComplexSpectrum, SpectralError> {
    complex_eigenvalues_with(&InRepoBackend, x)
}

/// Full factorization of X - z, with U^H and V^H retained for resolvent work.
pub fn singular_values_with(
    backend: &dyn SpectralBackend,
    x: &MatrixSample,
    z: Complex64,
) -> Result<HermitizedSpectrum, SpectralError> {
    let a = shifted_matrix(x, z);
    let f = backend.svd(&a, true)?;
    Ok(HermitizedSpectrum { z, s: f.s, svd_uh: f.uh.unwrap(), svd_vh: f.vh.unwrap() })
}

pub fn singular_values(x: &MatrixSample, z: Complex64) -> Result<HermitizedSpectrum, SpectralError> {
    singular_values_with(&InRepoBackend, x, z)
}

/// Values-only path; identical numbers to the full factorization, no factors.
pub fn singular_values_only(x: &MatrixSample, z: Complex64) -> Result<Vec<f64>, SpectralError> {
    Ok(InRepoBackend.svd(&shifted_matrix(x, z), false)?.s)
}

/// The 2n symmetric eigenvalues of the Hermitization at z, ascending.
pub fn hermitized_spectrum(x: &MatrixSample, z: Complex64) -> Result<Vec<f64>, SpectralError> {
    let s = singular_values_only(x, z)?;
    let hs = HermitizedSpectrum { z, s, svd_uh: CMat::zeros(0, 0), svd_vh: CMat::zeros(0, 0) };
    Ok(hs.hermitized())
}
