//! Radial test functions with closed-form Laplacians, linear eigenvalue
//! statistics, the circular-law deterministic term, and the exact
//! log-determinant identity with its four-term decomposition.
//!
//! Everything works in the local coordinate w = sqrt(n)(z - z0): the test
//! function f lives at scale one, eigenvalues are pulled to that scale, and
//! the z-plane quadratures transform accordingly. The decomposition splits
//! the eta integral of the Hermitized resolvent trace at eta0 and T; the
//! spectral part is evaluated in closed form per node, the deterministic
//! counterpart by quadrature of the self-consistent solution, and the
//! [T, inf) tail analytically. lhs - det_term = I1 + I2 + I3 + I4 then holds
//! up to quadrature error, which is estimated by one grid refinement.

use crate::dyson;
use crate::ensemble::MatrixSample;
use crate::quad;
use crate::spectral::{self, ComplexSpectrum};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

/// Singular values below this on a quadrature node make log|det| unusable.
pub const SV_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum GirkoError {
    BadRadius { radius: f64 },
    BadExponent { p: u32 },
    ZeroSingularValue { z: Complex64 },
    Backend { message: String },
    Tail { message: String },
    Quadrature { message: String },
}

impl fmt::Display for GirkoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GirkoError::BadRadius { radius } => {
                write!(f, "test function radius must be positive, got {radius}")
            }
            GirkoError::BadExponent { p } => {
                write!(f, "polynomial bump needs p >= 4 for a continuous Laplacian, got {p}")
            }
            GirkoError::ZeroSingularValue { z } => {
                write!(f, "singular value below {SV_FLOOR:.0e} at node z = {z} even after jitter")
            }
            GirkoError::Backend { message } => write!(f, "spectral backend failed: {message}"),
            GirkoError::Tail { message } => write!(f, "tail integral failed: {message}"),
            GirkoError::Quadrature { message } => write!(f, "quadrature failed: {message}"),
        }
    }
}

impl std::error::Error for GirkoError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpKind {
    Mollifier,
    Polynomial(u32),
}

/// Radial bump supported in |w| <= radius, normalized to f(0) = 1, with
/// closed-form radial derivative and Laplacian f'' + f'/r.
#[derive(Debug, Clone, Copy)]
pub struct TestFunction {
    pub kind: BumpKind,
    pub radius: f64,
}

pub fn make_bump(kind: BumpKind, radius: f64) -> Result<TestFunction, GirkoError> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(GirkoError::BadRadius { radius });
    }
    if let BumpKind::Polynomial(p) = kind {
        if p < 4 {
            return Err(GirkoError::BadExponent { p });
        }
    }
    Ok(TestFunction { kind, radius })
}

impl TestFunction {
    /// Profile F(u) with u = (r/radius)^2: exp(1 - 1/(1-u)) or (1-u)^p.
    fn profile(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return 0.0;
        }
        match self.kind {
            BumpKind::Mollifier => (1.0 - 1.0 / (1.0 - u)).exp(),
            BumpKind::Polynomial(p) => (1.0 - u).powi(p as i32),
        }
    }

    pub fn value(&self, w: Complex64) -> f64 {
        self.profile(w.norm_sqr() / (self.radius * self.radius))
    }

    pub fn value_radial(&self, r: f64) -> f64 {
        self.profile(r * r / (self.radius * self.radius))
    }

    /// df/dr; zero at the origin and outside the support.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        let r2 = self.radius * self.radius;
        let u = r * r / r2;
        if u >= 1.0 {
            return 0.0;
        }
        let fp_u = match self.kind {
            BumpKind::Mollifier => {
                let g = 1.0 / (1.0 - u);
                -self.profile(u) * g * g
            }
            BumpKind::Polynomial(p) => -(p as f64) * (1.0 - u).powi(p as i32 - 1),
        };
        fp_u * 2.0 * r / r2
    }

    pub fn gradient(&self, w: Complex64) -> Complex64 {
        let r = w.norm();
        if r == 0.0 || r >= self.radius {
            return Complex64::new(0.0, 0.0);
        }
        w * (self.radial_derivative(r) / r)
    }

    /// Laplacian f'' + f'/r = (4/radius^2)(u F''(u) + F'(u)), closed form.
    pub fn laplacian(&self, w: Complex64) -> f64 {
        let r2 = self.radius * self.radius;
        let u = w.norm_sqr() / r2;
        if u >= 1.0 {
            return 0.0;
        }
        match self.kind {
            BumpKind::Mollifier => {
                let g = 1.0 / (1.0 - u);
                let f = self.profile(u);
                4.0 / r2 * f * g * g * (u * g * g - 2.0 * u * g - 1.0)
            }
            BumpKind::Polynomial(p) => {
                let pf = p as f64;
                4.0 * pf / r2 * (1.0 - u).powi(p as i32 - 2) * (pf * u - 1.0)
            }
        }
    }

    /// Radius where the Laplacian changes sign (negative cap, positive rim).
    /// Mollifier: u = (sqrt(5)-1)/2; polynomial: u = 1/p.
    pub fn laplacian_sign_change(&self) -> f64 {
        let u = match self.kind {
            BumpKind::Mollifier => (5f64.sqrt() - 1.0) / 2.0,
            BumpKind::Polynomial(p) => 1.0 / p as f64,
        };
        self.radius * u.sqrt()
    }

    /// L1 norm of the Laplacian over the plane. Since int of Delta f
    /// vanishes and the sign changes once, the divergence theorem gives
    /// the closed form -4 pi r* f'(r*) at the sign-change radius r*.
    pub fn laplacian_l1(&self) -> f64 {
        let rs = self.laplacian_sign_change();
        -4.0 * PI * rs * self.radial_derivative(rs)
    }
}

/// Sum of f(sqrt(n)(sigma_i - z0)) over the spectrum.
pub fn linear_statistic(spec: &ComplexSpectrum, f: &TestFunction, z0: Complex64) -> f64 {
    let sqrt_n = (spec.n() as f64).sqrt();
    spec.sigma.iter().map(|&s| f.value((s - z0) * sqrt_n)).sum()
}

fn gl48() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| quad::gauss_legendre(48))
}

fn gl64() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| quad::gauss_legendre(64))
}

/// int F(u(s)) s ds over [lo, hi], clamped to the support.
fn radial_mass(f: &TestFunction, lo: f64, hi: f64) -> f64 {
    let hi = hi.min(f.radius);
    if hi <= lo {
        return 0.0;
    }
    match f.kind {
        BumpKind::Polynomial(p) => {
            let g = |r: f64| {
                let u = (r * r / (f.radius * f.radius)).min(1.0);
                f.radius * f.radius / (2.0 * (p as f64 + 1.0))
                    * (1.0 - (1.0 - u).powi(p as i32 + 1))
            };
            g(hi) - g(lo)
        }
        BumpKind::Mollifier => {
            let (xs, ws) = gl64();
            let h = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            let s: f64 = xs
                .iter()
                .zip(ws)
                .map(|(x, w)| {
                    let r = mid + h * x;
                    w * f.value_radial(r) * r
                })
                .sum();
            s * h
        }
    }
}

/// (1/pi) int over the unit disk of f_{z0}, i.e. (1/pi) times the integral
/// of f(w) over {|z0 + w/sqrt(n)| <= 1}, with an error estimate from
/// doubling the angular order.
///
/// Polar form: for each angle the admissible radii form an interval with
/// endpoints solved exactly from the circle constraint; the angular
/// integrand is smooth between the finitely many transition angles, which
/// are located exactly and used as quadrature breakpoints.
pub fn deterministic_term(
    f: &TestFunction,
    z0: Complex64,
    n: usize,
) -> Result<(f64, f64), GirkoError> {
    let coarse = det_term_with_order(f, z0, n, 64);
    let fine = det_term_with_order(f, z0, n, 128);
    if !fine.is_finite() {
        return Err(GirkoError::Quadrature {
            message: format!("deterministic term diverged at z0 = {z0}"),
        });
    }
    Ok((fine, (fine - coarse).abs()))
}

fn det_term_with_order(f: &TestFunction, z0: Complex64, n: usize, order: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let a = z0.norm();
    let phi = z0.arg();
    let rr = f.radius;

    // transition angles: radial limit hits the support edge or the
    // admissible interval degenerates; both reduce to cos(theta - phi) = t/a
    let mut cuts: Vec<f64> = Vec::new();
    let mut push_cut = |t: f64| {
        if a > 0.0 && t.abs() <= a {
            let psi = (t / a).clamp(-1.0, 1.0).acos();
            for th in [phi + psi, phi - psi] {
                cuts.push(th.rem_euclid(2.0 * PI));
            }
        }
    };
    push_cut((1.0 - a * a - rr * rr / n as f64) * sqrt_n / (2.0 * rr));
    if a > 1.0 {
        push_cut(-(a * a - 1.0).sqrt());
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);

    let section = |theta: f64| -> f64 {
        let t = a * (theta - phi).cos();
        let disc = t * t - (a * a - 1.0);
        if disc <= 0.0 {
            return 0.0;
        }
        let sd = disc.sqrt();
        let lo = (sqrt_n * (-t - sd)).max(0.0);
        let hi = sqrt_n * (-t + sd);
        radial_mass(f, lo, hi)
    };

    let (xs, ws) = quad::gauss_legendre(order);
    let mut total = 0.0;
    let arcs = cuts.len().max(1);
    for i in 0..arcs {
        let (lo, hi) = if cuts.is_empty() {
            (0.0, 2.0 * PI)
        } else {
            let lo = cuts[i];
            let hi = if i + 1 < cuts.len() { cuts[i + 1] } else { cuts[0] + 2.0 * PI };
            (lo, hi)
        };
        let h = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let s: f64 = xs.iter().zip(&ws).map(|(x, w)| w * section(mid + h * x)).sum();
        total += s * h;
    }
    total / PI
}

/// int over [eta0, t] of the Hermitized resolvent's averaged imaginary
/// trace, in closed form: (1/(4n)) sum log((lambda^2+t^2)/(lambda^2+eta0^2))
/// with n = lambdas.len()/2, evaluated through log1p so widely separated
/// scales lose nothing.
///
/// Divergent (returns +inf) only when some lambda = 0 and eta0 = 0.
pub fn eta_integral_closed_form(lambdas: &[f64], eta0: f64, t: f64) -> f64 {
    assert!(eta0 >= 0.0 && eta0 < t, "need 0 <= eta0 < t");
    let coeff = 1.0 / (2.0 * lambdas.len() as f64);
    let sum: f64 = lambdas
        .iter()
        .map(|&l| {
            let a2 = l * l;
            if t > 1e150 {
                2.0 * t.ln() + (a2 / t / t).ln_1p() - (a2 + eta0 * eta0).ln()
            } else {
                ((t * t - eta0 * eta0) / (a2 + eta0 * eta0)).ln_1p()
            }
        })
        .sum();
    coeff * sum
}

/// int_0^eta0 Im mhat d eta by Gauss-Legendre after eta = eta0 u^3; the
/// cubic stretch turns the edge's eta^(1/3) behavior into a linear one.
fn imag_mhat_integral_cubic(zsq: f64, eta0: f64) -> f64 {
    let (xs, ws) = gl64();
    let s: f64 = xs
        .iter()
        .zip(ws)
        .map(|(x, w)| {
            let u = 0.5 * (x + 1.0);
            w * u * u * dyson::solve_y(zsq, eta0 * u * u * u)
        })
        .sum();
    3.0 * eta0 * 0.5 * s
}

/// int_a^b Im mhat d eta in the log coordinate s = ln eta, two 48-point
/// panels; the integrand eta * y(eta) is analytic there.
fn imag_mhat_integral_log(zsq: f64, a: f64, b: f64) -> f64 {
    let (xs, ws) = gl48();
    let (la, lb) = (a.ln(), b.ln());
    let mut total = 0.0;
    for p in 0..2 {
        let lo = la + (lb - la) * p as f64 / 2.0;
        let hi = la + (lb - la) * (p + 1) as f64 / 2.0;
        let h = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let s: f64 = xs
            .iter()
            .zip(ws)
            .map(|(x, w)| {
                let eta = (mid + h * x).exp();
                w * eta * dyson::solve_y(zsq, eta)
            })
            .sum();
        total += s * h;
    }
    total
}

/// Polar quadrature grid fitted to the test function's support disk:
/// composite Gauss-Legendre in the radius with base panels split at the
/// Laplacian sign-change radius and ending exactly at the support edge
/// (where the mollifier's boundary layer lives), times equispaced angles
/// (trapezoid is spectrally accurate for the periodic direction). Node
/// order is fixed (radius outer, angle inner) so reductions are
/// deterministic regardless of worker count.
#[derive(Debug, Clone, Copy)]
pub struct GirkoGrid {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub subdivisions: usize,
}

impl Default for GirkoGrid {
    fn default() -> Self {
        GirkoGrid { radial_nodes: 48, angular_nodes: 64, subdivisions: 1 }
    }
}

impl GirkoGrid {
    /// Doubles both the radial panel count and the angle count.
    pub fn refined(&self) -> GirkoGrid {
        GirkoGrid { subdivisions: self.subdivisions * 2, ..*self }
    }

    /// All 2D nodes and area weights over the support of f, fixed order.
    pub fn tensor(&self, f: &TestFunction) -> (Vec<Complex64>, Vec<f64>) {
        let (xs, ws) = quad::gauss_legendre(self.radial_nodes);
        let rs = f.laplacian_sign_change();
        let mut edges = Vec::with_capacity(2 * self.subdivisions + 1);
        for (lo, hi) in [(0.0, rs), (rs, f.radius)] {
            for k in 0..self.subdivisions {
                edges.push(lo + (hi - lo) * k as f64 / self.subdivisions as f64);
            }
        }
        edges.push(f.radius);

        let ntheta = self.angular_nodes * self.subdivisions;
        let dtheta = 2.0 * PI / ntheta as f64;
        let mut nodes = Vec::with_capacity((edges.len() - 1) * self.radial_nodes * ntheta);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for e in edges.windows(2) {
            let h = 0.5 * (e[1] - e[0]);
            let mid = 0.5 * (e[1] + e[0]);
            for (x, w) in xs.iter().zip(&ws) {
                let r = mid + h * x;
                let wr = w * h * r * dtheta;
                for j in 0..ntheta {
                    let th = dtheta * (j as f64 + 0.5);
                    nodes.push(Complex64::new(r * th.cos(), r * th.sin()));
                    weights.push(wr);
                }
            }
        }
        (nodes, weights)
    }
}

/// Singular values of X - z with the measure-zero zero-singular-value case
/// handled by one deterministic jitter of size 1e-8/sqrt(n).
pub fn guarded_singular_values(x: &MatrixSample, z: Complex64) -> Result<Vec<f64>, GirkoError> {
    let to_err = |e: spectral::SpectralError| GirkoError::Backend { message: e.to_string() };
    let s = spectral::singular_values_only(x, z).map_err(to_err)?;
    if s.iter().all(|&v| v >= SV_FLOOR) {
        return Ok(s);
    }
    let jit = Complex64::new(0.6, 0.8) * (1e-8 / (x.n() as f64).sqrt());
    eprintln!(
        "warning: singular value below {SV_FLOOR:.0e} at z = {z}; jittering the node by {:.1e}",
        jit.norm()
    );
    let s = spectral::singular_values_only(x, z + jit).map_err(to_err)?;
    if s.iter().all(|&v| v >= SV_FLOOR) {
        Ok(s)
    } else {
        Err(GirkoError::ZeroSingularValue { z })
    }
}

/// Quadrature of (1/(4 pi n)) Delta f_{z0}(z) log|det H^z| over the plane,
/// equal to (1/(2 pi)) int Delta f(w) sum_i log s_i(z0 + w/sqrt(n)) dw in
/// the local coordinate. `provider` yields singular values of X - z.
///
/// The log sum is singular at each eigenvalue, and no fixed grid converges
/// reliably through that. Since int Delta f(w) log|w - wi| dw = 2 pi f(wi)
/// exactly (inside the support by the Green identity, outside because the
/// log is harmonic there), the log distances to eigenvalues within twice
/// the support radius are subtracted from the provider data and their
/// counting contributions restored in closed form; the rule then only ever
/// sees a harmonic remainder it integrates at spectral accuracy.
pub fn girko_logdet_rhs<P>(
    provider: P,
    spec: &ComplexSpectrum,
    f: &TestFunction,
    z0: Complex64,
    n: usize,
    grid: &GirkoGrid,
) -> Result<f64, GirkoError>
where
    P: Fn(Complex64) -> Result<Vec<f64>, GirkoError> + Sync,
{
    let sqrt_n = (n as f64).sqrt();
    let near: Vec<Complex64> = spec
        .sigma
        .iter()
        .map(|&s| (s - z0) * sqrt_n)
        .filter(|w| w.norm() <= 2.0 * f.radius)
        .collect();
    let (nodes, weights) = grid.tensor(f);
    let logsums: Vec<f64> = nodes
        .par_iter()
        .map(|&w| {
            let z = z0 + w / sqrt_n;
            let s = provider(z)?;
            for &v in &s {
                if v < SV_FLOOR {
                    return Err(GirkoError::ZeroSingularValue { z });
                }
            }
            // provider success floors every singular value at SV_FLOOR and
            // the smallest one lower-bounds the eigenvalue distance, so
            // the subtracted logs stay finite
            let raw: f64 = s.iter().map(|&v| v.ln()).sum();
            Ok(raw - near.iter().map(|&wi| (w - wi).norm().ln()).sum::<f64>())
        })
        .collect::<Result<_, _>>()?;
    // Delta f integrates to zero, so shifting every remainder by a constant
    // leaves the integral unchanged while removing the O(n log|z|) common
    // mode that would otherwise magnify quadrature noise.
    let shift = logsums[0];
    let mut total = 0.0;
    for ((w, wt), ls) in nodes.iter().zip(&weights).zip(&logsums) {
        total += wt * f.laplacian(*w) * (ls - shift);
    }
    let counted: f64 = near.iter().map(|&wi| f.value(wi)).sum();
    Ok(total / (2.0 * PI) + counted)
}

/// One decomposition of the Girko identity at fixed (eta0, T).
#[derive(Debug, Clone)]
pub struct GirkoDecomposition {
    pub lhs: f64,
    pub det_term: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub eta0: f64,
    pub t: f64,
    pub quadrature_error_estimate: f64,
}

impl GirkoDecomposition {
    /// |(lhs - det_term) - (i1+i2+i3+i4)|; an identity up to quadrature.
    pub fn identity_residual(&self) -> f64 {
        ((self.lhs - self.det_term) - (self.i1 + self.i2 + self.i3 + self.i4)).abs()
    }
}

/// Default regularization cap T = n^3: large enough that I1 and I4 sit
/// below 1e-6, small enough that nothing needs extended precision.
pub fn default_t(n: usize) -> f64 {
    (n as f64).powi(3)
}

/// Default split point eta0 = n^(-3/4-delta).
pub fn default_eta0(n: usize, delta: f64) -> f64 {
    (n as f64).powf(-0.75 - delta)
}

/// The deterministic pieces of the node integrands depend on z only
/// through |z|^2, so they are tabulated once on Chebyshev-Lobatto points
/// over the |z|^2 range the grid can reach and read back by barycentric
/// interpolation. Each grid node then costs one singular value
/// decomposition instead of three eta quadratures.
struct RadialTable {
    lo: f64,
    hi: f64,
    xs: Vec<f64>,
    bw: Vec<f64>,
    g2: Vec<f64>,
    g3: Vec<f64>,
    g4: Vec<f64>,
    /// largest interpolation defect seen at off-grid validation points
    worst_gap: f64,
}

impl RadialTable {
    fn truth(u: f64, eta0: f64, t: f64) -> Result<(f64, f64, f64), GirkoError> {
        let g2 = imag_mhat_integral_cubic(u, eta0);
        let g3 = imag_mhat_integral_log(u, eta0, t);
        // tail quadrature error is certified inside mhat_tail_integral
        let (g4, _) = dyson::mhat_tail_integral(Complex64::new(u.sqrt(), 0.0), t)
            .map_err(|e| GirkoError::Tail { message: e.to_string() })?;
        Ok((g2, g3, g4))
    }

    fn build(
        z0: Complex64,
        f: &TestFunction,
        n: usize,
        eta0: f64,
        t: f64,
    ) -> Result<RadialTable, GirkoError> {
        let r = f.radius / (n as f64).sqrt();
        let a = z0.norm();
        let lo = (a - r).max(0.0).powi(2);
        let hi = (a + r).powi(2);
        // the [0, eta0] integral's u-derivatives near u = 1 live on the
        // scale eta0^(2/3); 97 points keep several nodes inside that layer
        let m = 96usize;
        let xs: Vec<f64> = (0..=m).map(|j| (PI * j as f64 / m as f64).cos()).collect();
        let bw: Vec<f64> = (0..=m)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == m {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let gs: Vec<(f64, f64, f64)> = xs
            .par_iter()
            .map(|&x| Self::truth(lo + 0.5 * (hi - lo) * (x + 1.0), eta0, t))
            .collect::<Result<_, _>>()?;
        let mut table = RadialTable {
            lo,
            hi,
            xs,
            bw,
            g2: gs.iter().map(|g| g.0).collect(),
            g3: gs.iter().map(|g| g.1).collect(),
            g4: gs.iter().map(|g| g.2).collect(),
            worst_gap: 0.0,
        };
        for x in [-0.934_17, 0.057_31, 0.813_47] {
            let u = lo + 0.5 * (hi - lo) * (x + 1.0);
            let exact = Self::truth(u, eta0, t)?;
            let interp = table.eval(u);
            table.worst_gap = table
                .worst_gap
                .max((exact.0 - interp.0).abs())
                .max((exact.1 - interp.1).abs())
                .max((exact.2 - interp.2).abs());
        }
        Ok(table)
    }

    fn eval(&self, u: f64) -> (f64, f64, f64) {
        let x = 2.0 * (u - self.lo) / (self.hi - self.lo) - 1.0;
        let (mut n2, mut n3, mut n4, mut den) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..self.xs.len() {
            let dx = x - self.xs[j];
            if dx.abs() < 1e-15 {
                return (self.g2[j], self.g3[j], self.g4[j]);
            }
            let c = self.bw[j] / dx;
            den += c;
            n2 += c * self.g2[j];
            n3 += c * self.g3[j];
            n4 += c * self.g4[j];
        }
        (n2 / den, n3 / den, n4 / den)
    }
}

/// Per-node integrand values for the four terms: I1's log det shifted by
/// the z-independent 2n log T (which integrates to zero against Delta f
/// exactly, and would otherwise amplify quadrature noise), the closed-form
/// spectral eta integrals minus the tabulated deterministic quadratures,
/// and the analytic tail.
fn node_terms(
    x: &MatrixSample,
    table: &RadialTable,
    z: Complex64,
    eta0: f64,
    t: f64,
) -> Result<(f64, f64, f64, f64), GirkoError> {
    let s = guarded_singular_values(x, z)?;
    let lam: Vec<f64> = s.iter().flat_map(|&v| [v, -v]).collect();
    let (g2, g3, g4) = table.eval(z.norm_sqr());
    let q1: f64 = s.iter().map(|&v| (v * v / (t * t)).ln_1p()).sum();
    let q2 = eta_integral_closed_form(&lam, 0.0, eta0) - g2;
    let q3 = eta_integral_closed_form(&lam, eta0, t) - g3;
    Ok((q1, q2, q3, g4))
}

fn decompose_on_grid(
    x: &MatrixSample,
    table: &RadialTable,
    near: &[Complex64],
    f: &TestFunction,
    z0: Complex64,
    eta0: f64,
    t: f64,
    grid: &GirkoGrid,
) -> Result<(f64, f64, f64, f64), GirkoError> {
    let n = x.n();
    let nf = n as f64;
    let sqrt_n = nf.sqrt();
    let (nodes, weights) = grid.tensor(f);
    let per_node: Vec<(f64, f64, f64, f64)> = nodes
        .par_iter()
        .map(|&w| node_terms(x, table, z0 + w / sqrt_n, eta0, t))
        .collect::<Result<_, _>>()?;
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for ((w, wt), q) in nodes.iter().zip(&weights).zip(&per_node) {
        let d = wt * f.laplacian(*w);
        // the closed-form eta integral on [0, eta0] diverges like
        // -(1/n) log s_min at each eigenvalue; adding (1/n) log|sigma_i - z|
        // per nearby eigenvalue smooths it, and the correction re-enters I2
        // below in closed form through the same Green identity as the
        // log det quadrature
        let reg: f64 = near
            .iter()
            .map(|&wi| ((w - wi).norm().ln() - sqrt_n.ln()) / nf)
            .sum();
        s1 += d * q.0;
        s2 += d * (q.1 + reg);
        s3 += d * q.2;
        s4 += d * q.3;
    }
    let counted: f64 = near.iter().map(|&wi| f.value(wi)).sum();
    Ok((
        s1 / (4.0 * PI),
        counted - nf / (2.0 * PI) * s2,
        -nf / (2.0 * PI) * s3,
        nf / (2.0 * PI) * s4,
    ))
}

/// Full decomposition: linear statistic, deterministic term, and I1..I4 on
/// the given grid plus one refinement; the refined values are returned and
/// the coarse-refined spread feeds the error estimate.
pub fn decompose_identity(
    x: &MatrixSample,
    f: &TestFunction,
    z0: Complex64,
    eta0: f64,
    t: f64,
    grid: &GirkoGrid,
) -> Result<GirkoDecomposition, GirkoError> {
    let spec = spectral::complex_eigenvalues(x)
        .map_err(|e| GirkoError::Backend { message: e.to_string() })?;
    let lhs = linear_statistic(&spec, f, z0);
    let (det_term, det_err) = deterministic_term(f, z0, x.n())?;
    let sqrt_n = (x.n() as f64).sqrt();
    let near: Vec<Complex64> = spec
        .sigma
        .iter()
        .map(|&s| (s - z0) * sqrt_n)
        .filter(|w| w.norm() <= 2.0 * f.radius)
        .collect();
    let table = RadialTable::build(z0, f, x.n(), eta0, t)?;
    let coarse = decompose_on_grid(x, &table, &near, f, z0, eta0, t, grid)?;
    let fine = decompose_on_grid(x, &table, &near, f, z0, eta0, t, &grid.refined())?;
    let spread = (fine.0 - coarse.0).abs()
        + (fine.1 - coarse.1).abs()
        + (fine.2 - coarse.2).abs()
        + (fine.3 - coarse.3).abs();
    // both grids read the same table, so its validation defect is an error
    // source the refinement spread cannot see; bound its push on I2..I4 by
    // the L1 mass of the Laplacian
    let table_err = 3.0 * (x.n() as f64) / (2.0 * PI) * f.laplacian_l1() * table.worst_gap;
    Ok(GirkoDecomposition {
        lhs,
        det_term,
        i1: fine.0,
        i2: fine.1,
        i3: fine.2,
        i4: fine.3,
        eta0,
        t,
        quadrature_error_estimate: det_err + spread + table_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_ginibre, Field};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bump_construction_and_support() {
        for kind in [BumpKind::Mollifier, BumpKind::Polynomial(4), BumpKind::Polynomial(7)] {
            let f = make_bump(kind, 2.0).unwrap();
            assert_eq!(f.value(c(0.0, 0.0)), 1.0);
            assert_eq!(f.radial_derivative(0.0), 0.0);
            assert_eq!(f.value(c(2.0, 0.0)), 0.0);
            assert_eq!(f.value(c(1.8, 1.2)), 0.0);
            assert_eq!(f.laplacian(c(0.0, 2.5)), 0.0);
            assert_eq!(f.gradient(c(2.1, 0.0)), c(0.0, 0.0));
            assert!(f.value(c(1.0, 0.5)) > 0.0);
        }
        assert!(matches!(
            make_bump(BumpKind::Polynomial(3), 1.0),
            Err(GirkoError::BadExponent { p: 3 })
        ));
        assert!(matches!(make_bump(BumpKind::Mollifier, 0.0), Err(GirkoError::BadRadius { .. })));
        assert!(matches!(make_bump(BumpKind::Mollifier, -1.0), Err(GirkoError::BadRadius { .. })));
    }

    #[test]
    fn laplacian_matches_five_point_stencil() {
        // radii stay below 0.7R: beyond that the mollifier's fourth
        // derivatives push the optimal f64 stencil error itself past 1e-6
        let h = 1e-4;
        for kind in [BumpKind::Mollifier, BumpKind::Polynomial(4), BumpKind::Polynomial(6)] {
            let f = make_bump(kind, 1.0).unwrap();
            for k in 0..20 {
                let r = 0.05 + 0.65 * k as f64 / 19.0;
                let th = 0.7 * k as f64;
                let w = c(r * th.cos(), r * th.sin());
                let fd = (f.value(w + c(h, 0.0))
                    + f.value(w - c(h, 0.0))
                    + f.value(w + c(0.0, h))
                    + f.value(w - c(0.0, h))
                    - 4.0 * f.value(w))
                    / (h * h);
                assert!(
                    (fd - f.laplacian(w)).abs() < 1e-6,
                    "{kind:?} at w={w}: fd={fd} closed={}",
                    f.laplacian(w)
                );
            }
        }
    }

    #[test]
    fn laplacian_integrates_to_zero() {
        // polar rule over the disk of radius 2R; the outer annulus
        // [R, 2R] is integrated too rather than assumed zero
        let (xs, ws) = quad::gauss_legendre(96);
        for kind in [BumpKind::Mollifier, BumpKind::Polynomial(5)] {
            let f = make_bump(kind, 1.5).unwrap();
            let rs = f.laplacian_sign_change();
            let mut total = 0.0;
            for (lo, hi) in [(0.0, rs), (rs, f.radius), (f.radius, 2.0 * f.radius)] {
                let h = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                for (x, w) in xs.iter().zip(&ws) {
                    let r = mid + h * x;
                    for j in 0..32 {
                        let th = 2.0 * PI * (j as f64 + 0.5) / 32.0;
                        total += w * h * r * (2.0 * PI / 32.0)
                            * f.laplacian(c(r * th.cos(), r * th.sin()));
                    }
                }
            }
            assert!(total.abs() <= 1e-8 * f.laplacian_l1(), "{kind:?}: {total:.3e}");
        }
    }

    #[test]
    fn grid_weights_integrate_smooth_functions() {
        // area of the support disk, and the bump's own mass against the
        // polynomial closed form, both through the quadrature weights
        let f = make_bump(BumpKind::Polynomial(4), 2.0).unwrap();
        let grid = GirkoGrid::default();
        let (nodes, weights) = grid.tensor(&f);
        let area: f64 = weights.iter().sum();
        assert!((area - PI * 4.0).abs() < 1e-10 * area, "area {area}");
        let mass: f64 = nodes.iter().zip(&weights).map(|(w, wt)| wt * f.value(*w)).sum();
        assert!((mass - PI * 4.0 / 5.0).abs() < 1e-10, "mass {mass}");
        let refined = grid.refined();
        assert_eq!(refined.subdivisions, 2);
        assert!(refined.tensor(&f).0.len() > nodes.len());
    }

    #[test]
    fn laplacian_l1_closed_form_matches_quadrature() {
        let (xs, ws) = quad::gauss_legendre(96);
        for kind in [BumpKind::Mollifier, BumpKind::Polynomial(4)] {
            let f = make_bump(kind, 2.0).unwrap();
            let rs = f.laplacian_sign_change();
            let mut total = 0.0;
            for (lo, hi) in [(0.0, rs), (rs, f.radius)] {
                let h = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                let s: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(x, w)| {
                        let r = mid + h * x;
                        w * f.laplacian(c(r, 0.0)).abs() * r
                    })
                    .sum();
                total += 2.0 * PI * s * h;
            }
            let closed = f.laplacian_l1();
            assert!((total - closed).abs() < 1e-9 * closed, "{kind:?}");
        }
    }

    #[test]
    fn linear_statistic_support_cases() {
        let f = make_bump(BumpKind::Mollifier, 1.0).unwrap();
        let spec = ComplexSpectrum { sigma: vec![c(0.5, 0.0), c(0.0, 0.5), c(-0.3, 0.1), c(0.2, -0.4)] };
        // support radius 1/sqrt(4) = 0.5 around z0 = 5: nothing inside
        assert_eq!(linear_statistic(&spec, &f, c(5.0, 0.0)), 0.0);
        // eigenvalue exactly at z0 contributes f(0) = 1
        let hit = linear_statistic(&spec, &f, c(0.5, 0.0));
        assert!(hit >= 1.0);
    }

    #[test]
    fn linear_statistic_translation_covariance_is_exact() {
        // dyadic data keeps every operation exact, so replacing f by
        // f(. - a) and z0 by z0 + a/sqrt(n) reproduces identical bits
        let f = make_bump(BumpKind::Polynomial(4), 2.0).unwrap();
        let sigma = vec![c(0.25, -0.5), c(-0.375, 0.125), c(0.8125, 0.0), c(0.0625, 0.75)];
        let spec = ComplexSpectrum { sigma: sigma.clone() };
        let z0 = c(0.375, -0.25);
        let a = c(0.5, 0.25);
        let sqrt_n = 2.0;
        let shifted: f64 = sigma.iter().map(|&s| f.value((s - z0) * sqrt_n - a)).sum();
        let moved = linear_statistic(&spec, &f, z0 + a / sqrt_n);
        assert_eq!(shifted, moved);
    }

    #[test]
    fn deterministic_term_deep_inside_is_exact_polynomial_mass() {
        // (1/pi) int f = R^2/(p+1) when the disk constraint is inactive
        let f = make_bump(BumpKind::Polynomial(4), 3.0).unwrap();
        let (v, err) = deterministic_term(&f, c(0.0, 0.0), 400).unwrap();
        assert!((v - 9.0 / 5.0).abs() < 1e-12, "v={v}");
        assert!(err < 1e-12);
    }

    #[test]
    fn deterministic_term_far_outside_is_zero() {
        let f = make_bump(BumpKind::Mollifier, 2.0).unwrap();
        let (v, _) = deterministic_term(&f, c(3.0, 1.0), 64).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn deterministic_term_edge_approaches_half_mass() {
        let f = make_bump(BumpKind::Mollifier, 3.0).unwrap();
        let full = 2.0 * radial_mass(&f, 0.0, f.radius);
        let half = 0.5 * full;
        let (v, _) = deterministic_term(&f, c(1.0, 0.0), 1024).unwrap();
        assert!((v - half).abs() < 0.02 * half, "v={v} half={half}");
        // rotation invariance of the radial bump
        let (v_rot, _) = deterministic_term(&f, c(0.0, 1.0), 1024).unwrap();
        assert!((v - v_rot).abs() < 1e-10);
    }

    #[test]
    fn eta_integral_closed_form_examples() {
        // single lambda = 0: value log(t/eta0)
        let v = eta_integral_closed_form(&[0.0], 1e-3, 10.0);
        assert!((v - (10.0f64 / 1e-3).ln()).abs() < 1e-12);
        // monotone in t
        let lams = [0.3, -0.3, 1.1, -1.1];
        let a = eta_integral_closed_form(&lams, 0.01, 10.0);
        let b = eta_integral_closed_form(&lams, 0.01, 20.0);
        assert!(b > a);
        // huge t path stays finite and close to the log-split form
        let c1 = eta_integral_closed_form(&lams, 0.01, 1e200);
        assert!(c1.is_finite() && c1 > 0.0);
    }

    #[test]
    fn eta_integral_matches_adaptive_quadrature() {
        let lams = [0.05, -0.05, 0.7, -0.7, 1.9, -1.9, 0.33, -0.33];
        let (eta0, t) = (1e-3, 50.0);
        let closed = eta_integral_closed_form(&lams, eta0, t);
        let trace = |eta: f64| {
            lams.iter().map(|&l| eta / (l * l + eta * eta)).sum::<f64>() / lams.len() as f64
        };
        // log coordinate keeps the adaptive rule efficient across scales
        let (quadv, _) =
            quad::adaptive_simpson(|s| s.exp() * trace(s.exp()), eta0.ln(), t.ln(), 1e-12);
        assert!((closed - quadv).abs() < 1e-10, "closed={closed} quad={quadv}");
    }

    #[test]
    fn logdet_rhs_matches_linear_statistic_n16() {
        let x = sample_ginibre(16, Field::Complex, 7, 0).unwrap();
        let spec = spectral::complex_eigenvalues(&x).unwrap();
        let f = make_bump(BumpKind::Mollifier, 3.0).unwrap();
        let z0 = c(1.0, 0.0);
        let lhs = linear_statistic(&spec, &f, z0);
        let provider = |z: Complex64| guarded_singular_values(&x, z);
        let coarse =
            girko_logdet_rhs(&provider, &spec, &f, z0, 16, &GirkoGrid::default()).unwrap();
        let fine =
            girko_logdet_rhs(&provider, &spec, &f, z0, 16, &GirkoGrid::default().refined())
                .unwrap();
        // the harmonic remainder puts both grids at the rounding floor, so
        // refinement has nothing left to halve
        assert!((coarse - lhs).abs() <= 1e-8, "lhs={lhs} coarse={coarse}");
        assert!((fine - lhs).abs() <= 1e-8, "lhs={lhs} fine={fine}");
        assert!((fine - coarse).abs() <= 1e-8, "coarse={coarse} fine={fine}");
    }

    #[test]
    fn logdet_rhs_vanishes_off_spectrum() {
        let x = sample_ginibre(16, Field::Complex, 7, 0).unwrap();
        let f = make_bump(BumpKind::Mollifier, 3.0).unwrap();
        let z0 = c(3.0, 0.0);
        let spec = spectral::complex_eigenvalues(&x).unwrap();
        assert_eq!(linear_statistic(&spec, &f, z0), 0.0);
        let provider = |z: Complex64| guarded_singular_values(&x, z);
        let rhs = girko_logdet_rhs(&provider, &spec, &f, z0, 16, &GirkoGrid::default()).unwrap();
        assert!(rhs.abs() < 1e-6, "rhs={rhs:.2e}");
    }

    #[test]
    fn logdet_rhs_reports_degenerate_node() {
        let f = make_bump(BumpKind::Mollifier, 1.0).unwrap();
        let spec = ComplexSpectrum { sigma: vec![] };
        let provider = |_z: Complex64| Ok(vec![1e-14, 1.0]);
        let got = girko_logdet_rhs(&provider, &spec, &f, c(0.0, 0.0), 4, &GirkoGrid::default());
        assert!(matches!(got, Err(GirkoError::ZeroSingularValue { .. })));
    }

    #[test]
    fn decomposition_identity_holds_n16() {
        let x = sample_ginibre(16, Field::Complex, 11, 0).unwrap();
        let f = make_bump(BumpKind::Mollifier, 3.0).unwrap();
        let z0 = c(1.0, 0.0);
        let (eta0, t) = (default_eta0(16, 0.05), default_t(16));
        let d = decompose_identity(&x, &f, z0, eta0, t, &GirkoGrid::default()).unwrap();
        let residual = d.identity_residual();
        assert!(
            residual <= 1e-3 * d.lhs.abs().max(1.0),
            "residual={residual:.3e} lhs={} det={} i={},{},{},{} est={:.2e}",
            d.lhs,
            d.det_term,
            d.i1,
            d.i2,
            d.i3,
            d.i4,
            d.quadrature_error_estimate
        );
        // paper-scale magnitude checks at T = n^3
        let l1 = f.laplacian_l1();
        assert!(d.i1.abs() <= (16f64).powf(1.1) * l1 / (t * t));
        assert!(d.i4.abs() <= 16.0 * l1 / t);
    }

    #[test]
    fn decomposition_scale_parameters() {
        assert_eq!(default_t(64), 262144.0);
        let e = default_eta0(64, 0.05);
        assert!((e - 64f64.powf(-0.8)).abs() < 1e-15);
    }
}
