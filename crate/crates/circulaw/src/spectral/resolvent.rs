//! Hermitization spectra and exact resolvent evaluation through the SVD.
//!
//! For A = X - z with SVD A = U S V^H, the 2n x 2n block matrix
//! [[0, A], [A^H, 0]] has eigenvalues {±s_i}, and its resolvent at i eta has
//! the closed-form blocks
//!   [[i eta U W U^H,  U S W V^H],
//!    [V S W U^H,      i eta V W V^H]],   W = (S^2 + eta^2)^{-1}.
//! Trace and quadratic forms come straight from these, O(n^2) per (z, eta)
//! after the one-time factorization; the 2n x 2n matrix is only ever
//! assembled for the Ward diagnostic.

use super::cmat::CMat;
use super::SpectralError;
use num_complex::Complex64;

pub struct HermitizedSpectrum {
    pub z: Complex64,
    /// Singular values of X - z, descending.
    pub s: Vec<f64>,
    /// U^H, row-major.
    pub svd_uh: CMat,
    /// V^H, row-major.
    pub svd_vh: CMat,
}

impl HermitizedSpectrum {
    pub fn n(&self) -> usize {
        self.s.len()
    }

    /// The 2n eigenvalues {-s_i} ∪ {s_i}, ascending. The spectrum is
    /// symmetric by construction: out[i] == -out[2n-1-i] exactly.
    pub fn hermitized(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(2 * n);
        for &s in self.s.iter() {
            out.push(-s);
        }
        for &s in self.s.iter().rev() {
            out.push(s);
        }
        out
    }

    pub fn view(&self, eta: f64) -> Result<ResolventView<'_>, SpectralError> {
        if !(eta > 0.0) {
            return Err(SpectralError::NonPositiveEta { eta });
        }
        Ok(ResolventView { hs: self, eta })
    }

    /// Relative Frobenius error of U S V^H against the shifted matrix.
    pub fn reconstruction_error(&self, shifted: &CMat) -> f64 {
        let n = self.n();
        let mut svh = self.svd_vh.clone();
        for k in 0..n {
            let (re, im) = svh.row_mut(k);
            for j in 0..n {
                re[j] *= self.s[k];
                im[j] *= self.s[k];
            }
        }
        let rebuilt = self.svd_uh.adjoint_mul(&svh);
        rebuilt.sub(shifted).frobenius() / shifted.frobenius().max(1e-300)
    }
}

/// G^z(i eta) through the retained factors.
pub struct ResolventView<'a> {
    pub hs: &'a HermitizedSpectrum,
    pub eta: f64,
}

/// <G(i eta)> = (1/2n) sum_i 1/(lambda_i - i eta); purely imaginary.
pub fn resolvent_trace(rv: &ResolventView<'_>) -> Complex64 {
    let eta = rv.eta;
    let n = rv.hs.n();
    let mut acc = 0.0;
    for &s in &rv.hs.s {
        acc += eta / (s * s + eta * eta);
    }
    Complex64::new(0.0, acc / n as f64)
}

/// <x, G(i eta) y> for 2n-vectors, via the SVD block formulas in O(n^2).
pub fn resolvent_quadratic_form(
    rv: &ResolventView<'_>,
    x: &[Complex64],
    y: &[Complex64],
) -> Result<Complex64, SpectralError> {
    let n = rv.hs.n();
    if x.len() != 2 * n || y.len() != 2 * n {
        return Err(SpectralError::DimensionMismatch {
            expected: 2 * n,
            got: if x.len() != 2 * n { x.len() } else { y.len() },
        });
    }
    let eta = rv.eta;
    let split = |v: &[Complex64], lo: usize| -> (Vec<f64>, Vec<f64>) {
        let re: Vec<f64> = v[lo..lo + n].iter().map(|c| c.re).collect();
        let im: Vec<f64> = v[lo..lo + n].iter().map(|c| c.im).collect();
        (re, im)
    };
    let (xpre, xpim) = split(x, 0);
    let (xmre, xmim) = split(x, n);
    let (ypre, ypim) = split(y, 0);
    let (ymre, ymim) = split(y, n);
    // a = U^H x_+, b = V^H x_-, c = U^H y_+, d = V^H y_-
    let (are, aim) = rv.hs.svd_uh.matvec(&xpre, &xpim);
    let (bre, bim) = rv.hs.svd_vh.matvec(&xmre, &xmim);
    let (cre, cim) = rv.hs.svd_uh.matvec(&ypre, &ypim);
    let (dre, dim) = rv.hs.svd_vh.matvec(&ymre, &ymim);
    let mut acc = Complex64::new(0.0, 0.0);
    let ieta = Complex64::new(0.0, eta);
    for k in 0..n {
        let s = rv.hs.s[k];
        let w = 1.0 / (s * s + eta * eta);
        let ak = Complex64::new(are[k], -aim[k]);
        let bk = Complex64::new(bre[k], -bim[k]);
        let ck = Complex64::new(cre[k], cim[k]);
        let dk = Complex64::new(dre[k], dim[k]);
        acc += ((ak * ck + bk * dk) * ieta + (ak * dk + bk * ck) * s) * w;
    }
    Ok(acc)
}

/// The full 2n x 2n resolvent, assembled from the blocks. Used by the Ward
/// diagnostic and by tests; the statistical paths never call this.
pub fn assemble_resolvent(rv: &ResolventView<'_>) -> CMat {
    let n = rv.hs.n();
    let eta = rv.eta;
    let uh = &rv.hs.svd_uh;
    let vh = &rv.hs.svd_vh;
    let scale_rows = |m: &CMat, f: &dyn Fn(f64) -> f64| -> CMat {
        let mut out = m.clone();
        for k in 0..n {
            let c = f(rv.hs.s[k]);
            let (re, im) = out.row_mut(k);
            for j in 0..n {
                re[j] *= c;
                im[j] *= c;
            }
        }
        out
    };
    let w = |s: f64| 1.0 / (s * s + eta * eta);
    let sw = |s: f64| s / (s * s + eta * eta);
    let mut g11 = uh.adjoint_mul(&scale_rows(uh, &w));
    g11.scale_complex(Complex64::new(0.0, eta));
    let g12 = uh.adjoint_mul(&scale_rows(vh, &sw));
    let g21 = g12.adjoint();
    let mut g22 = vh.adjoint_mul(&scale_rows(vh, &w));
    g22.scale_complex(Complex64::new(0.0, eta));

    let mut g = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            g.set(i, j, g11.get(i, j));
            g.set(i, j + n, g12.get(i, j));
            g.set(i + n, j, g21.get(i, j));
            g.set(i + n, j + n, g22.get(i, j));
        }
    }
    g
}

/// Relative Frobenius deviation ||G G* - Im G / eta||_F / ||Im G / eta||_F.
/// Exact in exact arithmetic for any eta > 0.
pub fn ward_residual(rv: &ResolventView<'_>) -> f64 {
    let g = assemble_resolvent(rv);
    let gh = g.adjoint();
    let prod = g.mul(&gh);
    let mut img = g.sub(&gh);
    img.scale_complex(Complex64::new(0.0, -0.5)); // (G - G^H) / 2i
    img.scale_complex(Complex64::new(1.0 / rv.eta, 0.0));
    prod.sub(&img).frobenius() / img.frobenius().max(1e-300)
}
