//! Complex singular value decomposition, Golub-Kahan style.
//!
//! Householder bidiagonalization with phase absorption leaves a real
//! nonnegative bidiagonal; implicit-shift QR sweeps finish it off. The
//! unitary factors are accumulated as their conjugate transposes (U^H, V^H)
//! in row-major storage, so every update in both phases sweeps contiguous
//! rows. That orientation is also what the resolvent formulas consume.

use super::cmat::CMat;
use super::SpectralError;

pub struct SvdFactors {
    /// Singular values, descending.
    pub s: Vec<f64>,
    /// U^H when factors were requested.
    pub uh: Option<CMat>,
    /// V^H when factors were requested.
    pub vh: Option<CMat>,
}

pub fn svd(a: &CMat, want_factors: bool) -> Result<SvdFactors, SpectralError> {
    assert_eq!(a.n_rows(), a.n_cols(), "square input");
    let n = a.n_rows();
    let mut uh = if want_factors { Some(CMat::identity(n)) } else { None };
    let mut vh = if want_factors { Some(CMat::identity(n)) } else { None };
    if n == 0 {
        return Ok(SvdFactors { s: vec![], uh, vh });
    }
    let mut work_re = a.re.clone();
    let mut work_im = a.im.clone();
    let (mut d, mut e) = bidiagonalize(&mut work_re, &mut work_im, n, &mut uh, &mut vh);
    bidiagonal_qr(&mut d, &mut e, &mut uh, &mut vh)
        .map_err(|index| SpectralError::NonConvergence { index })?;
    for i in 0..n {
        if d[i] < 0.0 {
            d[i] = -d[i];
            if let Some(u) = uh.as_mut() {
                let (re, im) = u.row_mut(i);
                for v in re.iter_mut() {
                    *v = -*v;
                }
                for v in im.iter_mut() {
                    *v = -*v;
                }
            }
        }
    }
    // sort descending, carrying factor rows along
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let sorted: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let permute = |m: &CMat| {
        let mut out = CMat::zeros(n, n);
        for (new_i, &old_i) in order.iter().enumerate() {
            let (src_re, src_im) = m.row(old_i);
            let (dst_re, dst_im) = out.row_mut(new_i);
            dst_re.copy_from_slice(src_re);
            dst_im.copy_from_slice(src_im);
        }
        out
    };
    let uh = uh.map(|m| permute(&m));
    let vh = vh.map(|m| permute(&m));
    Ok(SvdFactors { s: sorted, uh, vh })
}

/// Reduce to real nonnegative bidiagonal (d, e); maintains
/// original = U * current * V^H with U^H, V^H accumulated in `uh`, `vh`.
fn bidiagonalize(
    are: &mut [f64],
    aim: &mut [f64],
    n: usize,
    uh: &mut Option<CMat>,
    vh: &mut Option<CMat>,
) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut wre = vec![0.0; n];
    let mut wim = vec![0.0; n];
    let mut yre = vec![0.0; n];
    let mut yim = vec![0.0; n];

    for k in 0..n {
        // ---- left reflector: zero column k below the diagonal ----
        let m = n - k;
        let mut xnorm2 = 0.0;
        for i in k..n {
            xnorm2 += are[i * n + k] * are[i * n + k] + aim[i * n + k] * aim[i * n + k];
        }
        if m >= 2 && xnorm2 > f64::MIN_POSITIVE {
            let x0re = are[k * n + k];
            let x0im = aim[k * n + k];
            let x0abs = (x0re * x0re + x0im * x0im).sqrt();
            let xnorm = xnorm2.sqrt();
            let (phre, phim) =
                if x0abs > 0.0 { (x0re / x0abs, x0im / x0abs) } else { (1.0, 0.0) };
            for i in 0..m {
                wre[i] = are[(k + i) * n + k];
                wim[i] = aim[(k + i) * n + k];
            }
            wre[0] += phre * xnorm;
            wim[0] += phim * xnorm;
            let tau = 1.0 / (xnorm2 + x0abs * xnorm);

            // A <- (I - tau w w*) A on cols k+1..n (col k is set below)
            if k + 1 < n {
                apply_reflector_rows(are, aim, n, k, k + 1, n, &wre[..m], &wim[..m], tau, &mut yre, &mut yim);
            }
            if let Some(u) = uh.as_mut() {
                apply_reflector_to_factor(u, k, &wre[..m], &wim[..m], tau, &mut yre, &mut yim);
            }
            are[k * n + k] = -phre * xnorm;
            aim[k * n + k] = -phim * xnorm;
            for i in k + 1..n {
                are[i * n + k] = 0.0;
                aim[i * n + k] = 0.0;
            }
        }

        // phase absorption: make the diagonal real nonnegative
        {
            let akk_re = are[k * n + k];
            let akk_im = aim[k * n + k];
            let akk_abs = (akk_re * akk_re + akk_im * akk_im).sqrt();
            if akk_abs > 0.0 {
                // multiply row k by conj(phase)
                let (pr, pi) = (akk_re / akk_abs, -akk_im / akk_abs);
                for j in k + 1..n {
                    let idx = k * n + j;
                    let (r, i) = (are[idx], aim[idx]);
                    are[idx] = pr * r - pi * i;
                    aim[idx] = pr * i + pi * r;
                }
                if let Some(u) = uh.as_mut() {
                    scale_row(u, k, pr, pi);
                }
            }
            d[k] = akk_abs;
            are[k * n + k] = akk_abs;
            aim[k * n + k] = 0.0;
        }

        if k + 1 >= n {
            continue;
        }

        // ---- right reflector: zero row k beyond the superdiagonal ----
        let mr = n - k - 1;
        if mr >= 2 {
            // built from y = conj(row segment), applied as A <- A (I - tau w w*)
            let mut ynorm2 = 0.0;
            for j in k + 1..n {
                ynorm2 += are[k * n + j] * are[k * n + j] + aim[k * n + j] * aim[k * n + j];
            }
            if ynorm2 > f64::MIN_POSITIVE {
                let y0re = are[k * n + k + 1];
                let y0im = -aim[k * n + k + 1];
                let y0abs = (y0re * y0re + y0im * y0im).sqrt();
                let ynorm = ynorm2.sqrt();
                let (phre, phim) =
                    if y0abs > 0.0 { (y0re / y0abs, y0im / y0abs) } else { (1.0, 0.0) };
                for j in 0..mr {
                    wre[j] = are[k * n + k + 1 + j];
                    wim[j] = -aim[k * n + k + 1 + j];
                }
                wre[0] += phre * ynorm;
                wim[0] += phim * ynorm;
                let tau = 1.0 / (ynorm2 + y0abs * ynorm);

                // rows k+1..n: t = A w, A -= tau t w*
                for r in k + 1..n {
                    let row = r * n;
                    let ar = &are[row + k + 1..row + n];
                    let ai = &aim[row + k + 1..row + n];
                    let mut tr = 0.0;
                    let mut ti = 0.0;
                    for j in 0..mr {
                        tr += ar[j] * wre[j] - ai[j] * wim[j];
                        ti += ar[j] * wim[j] + ai[j] * wre[j];
                    }
                    let (tr, ti) = (tau * tr, tau * ti);
                    let ar = &mut are[row + k + 1..row + n];
                    let ai = &mut aim[row + k + 1..row + n];
                    for j in 0..mr {
                        let u_re = tr * wre[j] + ti * wim[j];
                        let u_im = ti * wre[j] - tr * wim[j];
                        ar[j] -= u_re;
                        ai[j] -= u_im;
                    }
                }
                if let Some(v) = vh.as_mut() {
                    apply_reflector_to_factor(v, k + 1, &wre[..mr], &wim[..mr], tau, &mut yre, &mut yim);
                }
                // row k becomes (-conj(s), 0, ..., 0)
                are[k * n + k + 1] = -phre * ynorm;
                aim[k * n + k + 1] = phim * ynorm;
                for j in k + 2..n {
                    are[k * n + j] = 0.0;
                    aim[k * n + j] = 0.0;
                }
            }
        }

        // superdiagonal phase absorption
        {
            let ak_re = are[k * n + k + 1];
            let ak_im = aim[k * n + k + 1];
            let ak_abs = (ak_re * ak_re + ak_im * ak_im).sqrt();
            if ak_abs > 0.0 {
                // multiply column k+1 (rows k+1..n) by conj(phase)
                let (pr, pi) = (ak_re / ak_abs, -ak_im / ak_abs);
                for r in k + 1..n {
                    let idx = r * n + k + 1;
                    let (x, y) = (are[idx], aim[idx]);
                    are[idx] = pr * x - pi * y;
                    aim[idx] = pr * y + pi * x;
                }
                if let Some(v) = vh.as_mut() {
                    // V^H row picks up the conjugate of the column scaling
                    scale_row(v, k + 1, pr, -pi);
                }
            }
            e[k] = ak_abs;
            are[k * n + k + 1] = ak_abs;
            aim[k * n + k + 1] = 0.0;
        }
    }
    (d, e)
}

/// rows[start..start+w.len()) of the matrix (cols col_lo..col_hi):
/// A <- (I - tau w w*) A restricted to that block.
#[allow(clippy::too_many_arguments)]
fn apply_reflector_rows(
    are: &mut [f64],
    aim: &mut [f64],
    n: usize,
    start: usize,
    col_lo: usize,
    col_hi: usize,
    wre: &[f64],
    wim: &[f64],
    tau: f64,
    yre: &mut [f64],
    yim: &mut [f64],
) {
    let width = col_hi - col_lo;
    let m = wre.len();
    yre[..width].fill(0.0);
    yim[..width].fill(0.0);
    for i in 0..m {
        let (wr, wi) = (wre[i], wim[i]);
        let row = (start + i) * n;
        let ar = &are[row + col_lo..row + col_hi];
        let ai = &aim[row + col_lo..row + col_hi];
        for j in 0..width {
            yre[j] += wr * ar[j] + wi * ai[j];
            yim[j] += wr * ai[j] - wi * ar[j];
        }
    }
    for i in 0..m {
        let (wr, wi) = (tau * wre[i], tau * wim[i]);
        let row = (start + i) * n;
        let ar = &mut are[row + col_lo..row + col_hi];
        let ai = &mut aim[row + col_lo..row + col_hi];
        for j in 0..width {
            let t_re = wr * yre[j] - wi * yim[j];
            let t_im = wr * yim[j] + wi * yre[j];
            ar[j] -= t_re;
            ai[j] -= t_im;
        }
    }
}

/// factor <- (I - tau w w*) factor, acting on rows start.., all columns.
fn apply_reflector_to_factor(
    f: &mut CMat,
    start: usize,
    wre: &[f64],
    wim: &[f64],
    tau: f64,
    yre: &mut [f64],
    yim: &mut [f64],
) {
    let ncols = f.n_cols();
    let m = wre.len();
    yre[..ncols].fill(0.0);
    yim[..ncols].fill(0.0);
    for i in 0..m {
        let (wr, wi) = (wre[i], wim[i]);
        let (ar, ai) = f.row(start + i);
        for j in 0..ncols {
            yre[j] += wr * ar[j] + wi * ai[j];
            yim[j] += wr * ai[j] - wi * ar[j];
        }
    }
    for i in 0..m {
        let (wr, wi) = (tau * wre[i], tau * wim[i]);
        let (ar, ai) = f.row_mut(start + i);
        for j in 0..ncols {
            let t_re = wr * yre[j] - wi * yim[j];
            let t_im = wr * yim[j] + wi * yre[j];
            ar[j] -= t_re;
            ai[j] -= t_im;
        }
    }
}

fn scale_row(f: &mut CMat, row: usize, pr: f64, pi: f64) {
    let (re, im) = f.row_mut(row);
    for j in 0..re.len() {
        let (r, i) = (re[j], im[j]);
        re[j] = pr * r - pi * i;
        im[j] = pr * i + pi * r;
    }
}

/// row_i' = c row_i + s row_j; row_j' = -s row_i + c row_j
fn rot_rows(f: &mut CMat, i: usize, j: usize, c: f64, s: f64) {
    let (rei, imi, rej, imj) = f.two_rows_mut(i, j);
    for k in 0..rei.len() {
        let (ar, ai) = (rei[k], imi[k]);
        let (br, bi) = (rej[k], imj[k]);
        rei[k] = c * ar + s * br;
        imi[k] = c * ai + s * bi;
        rej[k] = c * br - s * ar;
        imj[k] = c * bi - s * ai;
    }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        return (1.0, 0.0);
    }
    if a == 0.0 {
        return (0.0, 1.0);
    }
    let h = a.hypot(b);
    (a / h, b / h)
}

/// Implicit-shift QR on the real bidiagonal; rotations mirrored onto the
/// stored U^H / V^H rows. Errors with the stuck window index.
fn bidiagonal_qr(
    d: &mut [f64],
    e: &mut [f64],
    uh: &mut Option<CMat>,
    vh: &mut Option<CMat>,
) -> Result<(), usize> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let anorm = d
        .iter()
        .chain(e.iter())
        .fold(0.0f64, |acc, &x| acc.max(x.abs()));
    if anorm == 0.0 {
        return Ok(());
    }
    let mut iter = 0usize;
    let max_iter = 30 * n;
    let mut hi = n - 1;

    while hi > 0 {
        // deflate the trailing off-diagonal if negligible
        {
            let thr = eps * (d[hi - 1].abs() + d[hi].abs());
            if e[hi - 1].abs() <= thr || e[hi - 1].abs() < f64::MIN_POSITIVE {
                e[hi - 1] = 0.0;
                hi -= 1;
                continue;
            }
        }
        // start of the unreduced block
        let mut lo = hi - 1;
        while lo > 0 {
            let thr = eps * (d[lo - 1].abs() + d[lo].abs());
            if e[lo - 1].abs() <= thr {
                e[lo - 1] = 0.0;
                break;
            }
            lo -= 1;
        }

        iter += 1;
        if iter > max_iter {
            return Err(hi);
        }

        // a vanishing diagonal breaks the shift; chase its off-diagonal away
        {
            let mut found = false;
            for idx in lo..hi {
                if d[idx].abs() <= eps * anorm {
                    d[idx] = 0.0;
                    let mut z = e[idx];
                    e[idx] = 0.0;
                    for j in (idx + 1)..=hi {
                        let (c, s) = givens(d[j], z);
                        d[j] = c * d[j] + s * z;
                        if j < hi {
                            z = -s * e[j];
                            e[j] = c * e[j];
                        }
                        if let Some(u) = uh.as_mut() {
                            rot_rows(u, j, idx, c, s);
                        }
                    }
                    found = true;
                    break;
                }
            }
            if found {
                continue;
            }
        }

        // Wilkinson shift from the trailing 2x2 of B^T B
        let d_hi = d[hi];
        let d_hi1 = d[hi - 1];
        let e_hi1 = e[hi - 1];
        let e_hi2 = if hi >= 2 && hi - 2 >= lo { e[hi - 2] } else { 0.0 };
        let t11 = d_hi1 * d_hi1 + e_hi2 * e_hi2;
        let t12 = d_hi1 * e_hi1;
        let t22 = d_hi * d_hi + e_hi1 * e_hi1;
        let dd = (t11 - t22) / 2.0;
        let sign_d = if dd >= 0.0 { 1.0 } else { -1.0 };
        let mu = t22 - t12 * t12 / (dd + sign_d * (dd * dd + t12 * t12).sqrt());

        // implicit chase
        let mut x = d[lo] * d[lo] - mu;
        let mut z = d[lo] * e[lo];
        for k in lo..hi {
            let (c, s) = givens(x, z);
            if k > lo {
                e[k - 1] = c * x + s * z;
            }
            let dk = d[k];
            let ek = e[k];
            let dk1 = d[k + 1];
            d[k] = c * dk + s * ek;
            e[k] = c * ek - s * dk;
            let bulge = s * dk1;
            d[k + 1] = c * dk1;
            if let Some(v) = vh.as_mut() {
                rot_rows(v, k, k + 1, c, s);
            }

            let (c2, s2) = givens(d[k], bulge);
            d[k] = c2 * d[k] + s2 * bulge;
            let old_ek = e[k];
            let old_dk1 = d[k + 1];
            e[k] = c2 * old_ek + s2 * old_dk1;
            d[k + 1] = c2 * old_dk1 - s2 * old_ek;
            if k + 1 < hi {
                let old_ek1 = e[k + 1];
                x = e[k];
                z = s2 * old_ek1;
                e[k + 1] = c2 * old_ek1;
            }
            if let Some(u) = uh.as_mut() {
                rot_rows(u, k, k + 1, c2, s2);
            }
        }
    }
    Ok(())
}
