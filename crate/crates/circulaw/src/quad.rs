//! One-dimensional quadrature building blocks shared by the analytic modules.

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the three-term recurrence, seeded with the Chebyshev
/// angle estimate. Accurate to machine precision for the orders used here
/// (k up to a few hundred).
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1, "need at least one node");
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    let m = k.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..60 {
            let (p, d) = legendre_pair(k, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1e-3) {
                let (p, d) = legendre_pair(k, x);
                dp = d;
                x -= p / d;
                break;
            }
        }
        // x is the i-th root from the right; mirror for the left half.
        nodes[i] = -x;
        nodes[k - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    if k % 2 == 1 {
        nodes[k / 2] = 0.0;
    }
    (nodes, weights)
}

/// Legendre P_k(x) and its derivative.
fn legendre_pair(k: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if k == 0 {
        return (1.0, 0.0);
    }
    for j in 1..k {
        let jf = j as f64;
        let p_next = ((2.0 * jf + 1.0) * x * p - jf * p_prev) / (jf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let dp = k as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Adaptive Simpson integration of `f` over [a, b].
///
/// Returns (value, error estimate). The error estimate is the accumulated
/// |S_fine - S_coarse|/15 over accepted panels, a standard upper proxy for
/// the true error on smooth integrands.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> (f64, f64) {
    let fa = f(a);
    let fb = f(b);
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    let whole = simpson_rule(a, b, fa, fm, fb);
    let mut err = 0.0;
    let v = simpson_recurse(&mut f, a, b, fa, fm, fb, whole, tol, 48, &mut err);
    (v, err)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err: &mut f64,
) -> f64 {
    let mid = 0.5 * (a + b);
    let lm = 0.5 * (a + mid);
    let rm = 0.5 * (mid + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_rule(a, mid, fa, flm, fm);
    let right = simpson_rule(mid, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        *err += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    let half_tol = 0.5 * tol;
    simpson_recurse(f, a, mid, fa, flm, fm, left, half_tol, depth - 1, err)
        + simpson_recurse(f, mid, b, fm, frm, fb, right, half_tol, depth - 1, err)
}

fn simpson_rule(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}
