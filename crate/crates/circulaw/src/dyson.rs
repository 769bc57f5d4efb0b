//! Scalar self-consistent equation for the deterministic resolvent
//! approximation on the imaginary axis.
//!
//! For a spectral parameter z and eta > 0 the scalar mhat(i eta) = i y with
//! y > 0 solves
//!
//!   -1/mhat = i eta + mhat - |z|^2 / (i eta + mhat),
//!
//! which on the imaginary axis reduces to the real equation
//!   1/y = (eta + y) + |z|^2 / (eta + y).
//! The 2x2 matrix M(i eta) built from the solution is the deterministic
//! target of the local law and the integrand of the long-eta tail terms in
//! the log-determinant decomposition.

use crate::quad;
use num_complex::Complex64;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum DysonError {
    NonPositiveEta { eta: f64 },
    NonFinitePoint { z: Complex64 },
    BadTolerance { tol: f64 },
    ToleranceNotMet { z: Complex64, eta: f64, residual: f64, tol: f64 },
    StepUnderflow { eta: f64 },
    TailStartTooSmall { t: f64 },
    TailQuadrature { error: f64 },
}

impl fmt::Display for DysonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DysonError::NonPositiveEta { eta } => {
                write!(f, "spectral offset eta must be positive, got {eta}")
            }
            DysonError::NonFinitePoint { z } => write!(f, "non-finite spectral point z = {z}"),
            DysonError::BadTolerance { tol } => {
                write!(f, "solver tolerance must be at least 1e-14, got {tol}")
            }
            DysonError::ToleranceNotMet { z, eta, residual, tol } => write!(
                f,
                "fixed-point residual {residual:.3e} above tolerance {tol:.3e} at z = {z}, eta = {eta}"
            ),
            DysonError::StepUnderflow { eta } => {
                write!(f, "finite-difference step underflows at eta = {eta}")
            }
            DysonError::TailStartTooSmall { t } => {
                write!(f, "tail integral needs T >= 10, got {t}")
            }
            DysonError::TailQuadrature { error } => {
                write!(f, "tail quadrature failed to converge, error estimate {error:.3e}")
            }
        }
    }
}

impl std::error::Error for DysonError {}

/// Solution of the scalar equation at the point (z, i eta).
///
/// `mhat` is purely imaginary with positive imaginary part, `u` lies in
/// (0, 1), `m_offdiag` equals -z u, and `residual` is the fixed-point defect
/// |-1/mhat - (i eta + mhat - |z|^2/(i eta + mhat))|.
#[derive(Debug, Clone)]
pub struct DysonSolution {
    pub z: Complex64,
    pub eta: f64,
    pub mhat: Complex64,
    pub u: f64,
    pub m_offdiag: Complex64,
    pub residual: f64,
}

/// Root of h(y) = y(eta+y) + y|z|^2/(eta+y) - 1. h is strictly increasing
/// with h(0) = -1, so the root is unique; it always lies below 1.
/// Crate-visible so quadratures can sample Im mhat without paying the
/// residual certification of solve_mhat at every node.
pub(crate) fn solve_y(zsq: f64, eta: f64) -> f64 {
    let h = |y: f64| y * (eta + y) + y * zsq / (eta + y) - 1.0;
    let mut lo = 0.0f64;
    let mut hi = 2f64.max(2.0 / eta);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Newton polish on f(y) = 1/y - (eta+y) - |z|^2/(eta+y); f'(root) < 0
    // strictly, so two steps this close to the root finish the job.
    let mut y = 0.5 * (lo + hi);
    for _ in 0..2 {
        let d = eta + y;
        let f = 1.0 / y - d - zsq / d;
        let fp = -1.0 / (y * y) - 1.0 + zsq / (d * d);
        let next = y - f / fp;
        if next > 0.0 {
            y = next;
        }
    }
    y
}

pub fn solve_mhat(z: Complex64, eta: f64, tol: f64) -> Result<DysonSolution, DysonError> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(DysonError::NonFinitePoint { z });
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(DysonError::NonPositiveEta { eta });
    }
    if !(tol >= 1e-14) {
        return Err(DysonError::BadTolerance { tol });
    }
    let y = solve_y(z.norm_sqr(), eta);
    let mhat = Complex64::new(0.0, y);
    let u = y / (eta + y);
    let ieta_m = Complex64::new(0.0, eta) + mhat;
    let residual = (-1.0 / mhat - (ieta_m - z.norm_sqr() / ieta_m)).norm();
    if !(residual <= tol) {
        return Err(DysonError::ToleranceNotMet { z, eta, residual, tol });
    }
    Ok(DysonSolution { z, eta, mhat, u, m_offdiag: -z * u, residual })
}

/// The 2x2 scalar representation of M(i eta), row major:
/// [[mhat, -z u], [-conj(z) u, mhat]].
pub fn build_m(sol: &DysonSolution) -> [[Complex64; 2]; 2] {
    [
        [sol.mhat, sol.m_offdiag],
        [-sol.z.conj() * sol.u, sol.mhat],
    ]
}

/// Operator norm of a 2x2 complex matrix (largest singular value).
fn norm_2x2(m: &[[Complex64; 2]; 2]) -> f64 {
    let g11 = m[0][0].norm_sqr() + m[1][0].norm_sqr();
    let g22 = m[0][1].norm_sqr() + m[1][1].norm_sqr();
    let g12 = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
    let mid = 0.5 * (g11 + g22);
    let rad = (0.25 * (g11 - g22) * (g11 - g22) + g12.norm_sqr()).sqrt();
    (mid + rad).sqrt()
}

/// Central finite-difference estimate of the operator norm of the eta
/// derivative of M(i eta). Used only as a diagnostic ratio against
/// eta^(-2/3) growth.
pub fn mhat_derivative_bound(z: Complex64, eta: f64) -> Result<f64, DysonError> {
    let h = eta * 1e-5;
    if eta + h == eta {
        return Err(DysonError::StepUnderflow { eta });
    }
    let hi = solve_mhat(z, eta + h, 1e-9)?;
    let lo = solve_mhat(z, eta - h, 1e-9)?;
    let mp = build_m(&hi);
    let mm = build_m(&lo);
    let scale = 1.0 / (2.0 * h);
    let diff = [
        [(mp[0][0] - mm[0][0]) * scale, (mp[0][1] - mm[0][1]) * scale],
        [(mp[1][0] - mm[1][0]) * scale, (mp[1][1] - mm[1][1]) * scale],
    ];
    Ok(norm_2x2(&diff))
}

const TAIL_CUT: f64 = 1e7;

/// Integral over [T, infinity) of Im mhat(i eta) - 1/(eta + 1).
///
/// The finite part up to TAIL_CUT is integrated adaptively in the log
/// coordinate; beyond the cut the large-eta expansion
///   Im mhat - 1/(eta+1) = eta^-2 - (2 + |z|^2) eta^-3 + O(eta^-4)
/// integrates to 1/C - (2 + |z|^2)/(2 C^2) with C = TAIL_CUT. Returns the
/// value together with an absolute error estimate.
pub fn mhat_tail_integral(z: Complex64, t: f64) -> Result<(f64, f64), DysonError> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(DysonError::NonFinitePoint { z });
    }
    if !(t >= 10.0) {
        return Err(DysonError::TailStartTooSmall { t });
    }
    let zsq = z.norm_sqr();
    let analytic = |c: f64| 1.0 / c - (2.0 + zsq) / (2.0 * c * c);
    // truncating the expansion at eta^-3 leaves O(c^-3) behind
    let analytic_err = |c: f64| 4.0 * (1.0 + zsq) * (1.0 + zsq) / (c * c * c);
    if t >= TAIL_CUT {
        return Ok((analytic(t), analytic_err(t)));
    }
    let g = |s: f64| {
        let eta = s.exp();
        (solve_y(zsq, eta) - 1.0 / (eta + 1.0)) * eta
    };
    let tol = 1e-12 / t;
    let (finite, quad_err) = quad::adaptive_simpson(g, t.ln(), TAIL_CUT.ln(), tol);
    let value = finite + analytic(TAIL_CUT);
    let err = quad_err + analytic_err(TAIL_CUT);
    if !value.is_finite() || quad_err > 1e-6 * (1.0 + value.abs()) {
        return Err(DysonError::TailQuadrature { error: quad_err });
    }
    Ok((value, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn y_z0(eta: f64) -> f64 {
        0.5 * ((eta * eta + 4.0).sqrt() - eta)
    }

    #[test]
    fn zero_point_closed_form() {
        let sol = solve_mhat(c(0.0, 0.0), 1.0, 1e-12).unwrap();
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        assert_eq!(sol.mhat.re, 0.0);
        assert!((sol.mhat.im - golden).abs() < 1e-13);
        assert!((sol.u - golden / (1.0 + golden)).abs() < 1e-13);
        assert_eq!(sol.m_offdiag, c(0.0, 0.0));
        assert!(sol.residual <= 1e-13);
    }

    #[test]
    fn zero_point_closed_form_across_eta() {
        for eta in [1e-6, 0.1, 3.0, 77.0] {
            let sol = solve_mhat(c(0.0, 0.0), eta, 1e-12).unwrap();
            assert!(
                (sol.mhat.im - y_z0(eta)).abs() < 1e-12 * y_z0(eta).max(1.0),
                "eta={eta}"
            );
        }
    }

    #[test]
    fn cube_root_scaling_on_unit_circle() {
        let lo = solve_mhat(c(1.0, 0.0), 1e-9, 1e-12).unwrap().mhat.im;
        let hi = solve_mhat(c(1.0, 0.0), 1e-5, 1e-12).unwrap().mhat.im;
        let slope = (hi.ln() - lo.ln()) / (1e-5f64.ln() - 1e-9f64.ln());
        assert!((slope - 1.0 / 3.0).abs() < 0.005, "slope={slope}");
    }

    #[test]
    fn residual_below_tolerance_on_disk_grid() {
        let zs = [
            c(0.0, 0.0),
            c(0.3, 0.0),
            c(0.0, 0.7),
            c(0.5, 0.5),
            c(-0.6, 0.3),
            c(0.9, 0.0),
            c(0.0, -1.0),
            c(0.6, -0.8),
        ];
        for z in zs {
            for eta in [1e-9, 3e-8, 1e-6, 3e-5, 1e-3, 3e-2, 1.0, 1e2] {
                let sol = solve_mhat(z, eta, 1e-12).unwrap();
                assert!(sol.residual <= 1e-12, "z={z} eta={eta} r={}", sol.residual);
                assert!(sol.mhat.im > 0.0 && sol.mhat.im < 1.0);
                assert!(sol.u > 0.0 && sol.u < 1.0);
            }
        }
    }

    #[test]
    fn herglotz_monotonicities_in_eta() {
        // eta * Im mhat grows and Im mhat / eta shrinks, strictly, for any z;
        // Im mhat itself is monotone only away from the unit circle (it picks
        // up the growing eta^(1/3) edge term as |z| -> 1).
        for z in [c(0.0, 0.0), c(0.7, 0.2), c(1.0, 0.0), c(1.3, 0.0)] {
            let mut prev_prod = 0.0f64;
            let mut prev_ratio = f64::INFINITY;
            for k in 0..30 {
                let eta = 1e-8 * 10f64.powf(k as f64 * 0.35);
                // outside the disk at tiny eta the root is ~eta/(|z|^2-1)
                // and one ulp of 1/y dwarfs tight absolute tolerances
                let y = solve_mhat(z, eta, 1e-6).unwrap().mhat.im;
                assert!(eta * y > prev_prod, "z={z} eta={eta}");
                assert!(y / eta < prev_ratio, "z={z} eta={eta}");
                prev_prod = eta * y;
                prev_ratio = y / eta;
            }
        }
    }

    #[test]
    fn imaginary_part_decreasing_in_eta_at_zero() {
        let mut prev = f64::INFINITY;
        for k in 0..30 {
            let eta = 1e-8 * 10f64.powf(k as f64 * 0.35);
            let y = solve_mhat(c(0.0, 0.0), eta, 1e-9).unwrap().mhat.im;
            assert!(y < prev, "not decreasing at eta={eta}");
            prev = y;
        }
    }

    #[test]
    fn scaling_bounds_inside_disk() {
        for z in [c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.9), c(1.0, 0.0)] {
            for k in 0..7 {
                let eta = 1e-8 * 10f64.powi(k);
                let y = solve_mhat(z, eta, 1e-12).unwrap().mhat.im;
                let cube = eta.powf(1.0 / 3.0);
                assert!(y >= 0.3 * cube, "lower bound z={z} eta={eta}");
                let gap = (1.0 - z.norm_sqr()).abs().sqrt();
                assert!(y <= 2.0 * (gap + cube), "upper bound z={z} eta={eta}");
            }
        }
    }

    #[test]
    fn linear_in_eta_outside_disk() {
        let z = c(1.5, 0.0);
        for k in 0..5 {
            let eta = 1e-6 * 10f64.powi(k);
            let y = solve_mhat(z, eta, 1e-12).unwrap().mhat.im;
            let ratio = y / eta;
            assert!((0.2..=2.0).contains(&ratio), "eta={eta} ratio={ratio}");
        }
    }

    #[test]
    fn input_validation() {
        assert!(matches!(
            solve_mhat(c(0.0, 0.0), 0.0, 1e-12),
            Err(DysonError::NonPositiveEta { .. })
        ));
        assert!(matches!(
            solve_mhat(c(0.0, 0.0), -1.0, 1e-12),
            Err(DysonError::NonPositiveEta { .. })
        ));
        assert!(matches!(
            solve_mhat(c(f64::NAN, 0.0), 1.0, 1e-12),
            Err(DysonError::NonFinitePoint { .. })
        ));
        assert!(matches!(
            solve_mhat(c(0.0, 0.0), 1.0, 1e-15),
            Err(DysonError::BadTolerance { .. })
        ));
        assert!(matches!(
            mhat_tail_integral(c(0.0, 0.0), 9.0),
            Err(DysonError::TailStartTooSmall { .. })
        ));
    }

    #[test]
    fn matrix_is_diagonal_at_zero_and_bounded_on_circle() {
        let sol = solve_mhat(c(0.0, 0.0), 0.5, 1e-12).unwrap();
        let m = build_m(&sol);
        assert_eq!(m[0][1], c(0.0, 0.0));
        assert_eq!(m[1][0], c(0.0, 0.0));
        assert_eq!(m[0][0], sol.mhat);

        let sol = solve_mhat(c(0.6, -0.8), 1e-6, 1e-12).unwrap();
        let m = build_m(&sol);
        assert!(norm_2x2(&m) <= 2.0);
        // off-diagonal pair carries the phase of z and its conjugate
        assert!((m[0][1] - -sol.z * sol.u).norm() == 0.0);
        assert!((m[1][0] - -sol.z.conj() * sol.u).norm() == 0.0);
    }

    #[test]
    fn derivative_bound_matches_quadratic_root_derivative_at_zero() {
        // y(eta) = (sqrt(eta^2+4) - eta)/2, so |y'(1)| = (1 - 1/sqrt(5))/2
        let got = mhat_derivative_bound(c(0.0, 0.0), 1.0).unwrap();
        let want = 0.5 * (1.0 - 1.0 / 5f64.sqrt());
        assert!((got - want).abs() < 1e-6, "got={got} want={want}");
    }

    #[test]
    fn derivative_ratio_stays_bounded() {
        let z = c(1.0, 0.0);
        let mut prev_ratio: Option<f64> = None;
        for eta in [1e-8, 1e-6, 1e-4, 1e-2] {
            let bound = mhat_derivative_bound(z, eta).unwrap();
            let ratio = bound * eta.powf(2.0 / 3.0);
            assert!(ratio <= 10.0, "eta={eta} ratio={ratio}");
            if let Some(p) = prev_ratio {
                assert!(ratio < 10.0 * p && p < 10.0 * ratio);
            }
            prev_ratio = Some(ratio);
        }
    }

    #[test]
    fn tail_integral_decays_like_one_over_t() {
        let z = c(0.5, 0.0);
        let mut vals = Vec::new();
        for t in [1e2, 1e3, 1e4] {
            let (v, e) = mhat_tail_integral(z, t).unwrap();
            assert!(v > 0.0 && v <= 2.0 / t, "t={t} v={v}");
            assert!(e < 1e-6);
            vals.push(v);
        }
        let s1 = (vals[1] / vals[0]).ln() / 10f64.ln();
        let s2 = (vals[2] / vals[1]).ln() / 10f64.ln();
        assert!((s1 + 1.0).abs() < 0.1, "decay exponent {s1}");
        assert!((s2 + 1.0).abs() < 0.1, "decay exponent {s2}");
    }

    #[test]
    fn tail_integral_matches_brute_force_at_zero() {
        let (adaptive, _) = mhat_tail_integral(c(0.0, 0.0), 100.0).unwrap();
        // composite Simpson in the log coordinate, same analytic tail
        let a = 100f64.ln();
        let b = TAIL_CUT.ln();
        let panels = 8192usize;
        let h = (b - a) / panels as f64;
        let g = |s: f64| {
            let eta = s.exp();
            (solve_y(0.0, eta) - 1.0 / (eta + 1.0)) * eta
        };
        let mut acc = g(a) + g(b);
        for i in 1..panels {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(a + i as f64 * h);
        }
        let brute = acc * h / 3.0 + 1.0 / TAIL_CUT - 1.0 / (TAIL_CUT * TAIL_CUT);
        assert!((adaptive - brute).abs() < 1e-4 * brute.abs().max(1e-3));
    }

    #[test]
    fn tail_integrand_positive_at_large_eta() {
        // recorded regression: at eta = 1e3 on the unit circle the integrand
        // sits at eta^-2 - 3 eta^-3 = 9.97e-7
        let y = solve_mhat(c(1.0, 0.0), 1e3, 1e-12).unwrap().mhat.im;
        let integrand = y - 1.0 / (1e3 + 1.0);
        assert!(integrand > 0.0);
        assert!((integrand - 9.97e-7).abs() < 3e-8, "integrand={integrand}");
    }

    #[test]
    fn tail_start_beyond_cut_is_pure_expansion() {
        let (v, e) = mhat_tail_integral(c(1.0, 0.0), 1e8).unwrap();
        assert!((v - (1e-8 - 3.0 / (2.0 * 1e16))).abs() < 1e-20);
        assert!(e < 1e-22);
    }
}
