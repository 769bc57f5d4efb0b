//! Slow, independently coded reference algorithms.
//!
//! Test suites use these as oracles against the production implementations.
//! Everything favors obviousness over speed; nothing here is called from a
//! production path. Matrices are plain row-major `Vec<Complex64>` on purpose,
//! so the oracles share no storage or kernel code with the fast backend.

use num_complex::Complex64;

/// Composite Simpson rule with a fixed panel count (panels must be even).
pub fn simpson_fixed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && panels % 2 == 0);
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Coefficients of det(lambda I - A) by the Faddeev-LeVerrier recurrence.
///
/// Returns c[0..=n] with c[n] = 1 (monic), so
/// det(lambda I - A) = sum_k c[k] lambda^k.
pub fn char_poly(a: &[Complex64], n: usize) -> Vec<Complex64> {
    assert_eq!(a.len(), n * n);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    // m holds M_k; starts as A, recurrence M_{k+1} = A (M_k + c_{n-k} I).
    let mut m = a.to_vec();
    for k in 1..=n {
        let trace: Complex64 = (0..n).map(|i| m[i * n + i]).sum();
        let c = -trace / k as f64;
        coeffs[n - k] = c;
        if k == n {
            break;
        }
        for i in 0..n {
            m[i * n + i] += c;
        }
        m = matmul(a, &m, n);
    }
    coeffs
}

/// All roots of a monic polynomial sum_k c[k] x^k (c[n] = 1) by
/// Durand-Kerner iteration from a spiral of distinct starting points.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    assert!((coeffs[n] - Complex64::new(1.0, 0.0)).norm() < 1e-12, "monic input");
    if n == 0 {
        return vec![];
    }
    let eval = |x: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            p = p * x + c;
        }
        p
    };
    // radius bound: 1 + max |c_k|
    let r = 1.0 + coeffs[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| seed.powu(k as u32 + 1) * r / seed.norm())
        .collect();
    for _ in 0..600 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 * r.max(1.0) {
            break;
        }
    }
    z
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// ascending. Input is row-major, only its Hermitian part is trusted.
pub fn hermitian_eigenvalues(a: &[Complex64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q].norm_sqr();
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum_or_one() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns: B = M J, J mixing (p, q) with phase on the off element
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * phase.conj() * mkq;
                    m[k * n + q] = s * phase * mkp + c * mkq;
                }
                // rows: M' = J^H B
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * phase * mqk;
                    m[q * n + k] = s * phase.conj() * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}
impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self >= 0.0 { 1.0 } else { -1.0 }
    }
}

/// Dense inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(a: &[Complex64], n: usize) -> Vec<Complex64> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut inv = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        inv[i * n + i] = Complex64::new(1.0, 0.0);
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i * n + col].norm().total_cmp(&m[j * n + col].norm()))
            .unwrap();
        assert!(m[pivot_row * n + col].norm() > 1e-300, "singular input");
        if pivot_row != col {
            for j in 0..n {
                m.swap(col * n + j, pivot_row * n + j);
                inv.swap(col * n + j, pivot_row * n + j);
            }
        }
        let pivot = m[col * n + col];
        for j in 0..n {
            m[col * n + j] /= pivot;
            inv[col * n + j] /= pivot;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = m[row * n + col];
            if factor.norm() == 0.0 {
                continue;
            }
            for j in 0..n {
                let mcj = m[col * n + j];
                let icj = inv[col * n + j];
                m[row * n + j] -= factor * mcj;
                inv[row * n + j] -= factor * icj;
            }
        }
    }
    inv
}

pub fn matmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

pub fn adjoint(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            c[j * n + i] = a[i * n + j].conj();
        }
    }
    c
}

/// Plain single-pass mean.
pub fn naive_mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Two-pass sample variance (divisor count - 1).
pub fn naive_variance(xs: &[f64]) -> f64 {
    let m = naive_mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}
