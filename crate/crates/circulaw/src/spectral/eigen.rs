//! Eigenvalues of dense complex non-symmetric matrices.
//!
//! Householder reduction to upper Hessenberg form, then implicit single-shift
//! QR with Wilkinson shifts. Eigenvalues only; no Schur vectors are
//! accumulated, which keeps the chase at two rotations per step.

use super::cmat::CMat;
use super::SpectralError;
use num_complex::Complex64;

/// |re| + |im|, the cheap magnitude used in all deflation tests.
#[inline]
fn cabs1(re: f64, im: f64) -> f64 {
    re.abs() + im.abs()
}

pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>, SpectralError> {
    assert_eq!(a.n_rows(), a.n_cols(), "square input");
    let n = a.n_rows();
    if n == 0 {
        return Ok(vec![]);
    }
    let mut hre = a.re.clone();
    let mut him = a.im.clone();
    hessenberg_in_place(&mut hre, &mut him, n);
    qr_eigenvalues(&mut hre, &mut him, n)
}

/// Unitary similarity reduction to upper Hessenberg form.
///
/// Reflectors are Hermitian projectors I - tau w w* with real tau, built so
/// that column k maps to -s e_1 with s carrying the phase of the pivot.
fn hessenberg_in_place(hre: &mut [f64], him: &mut [f64], n: usize) {
    if n < 3 {
        return;
    }
    let mut wre = vec![0.0; n];
    let mut wim = vec![0.0; n];
    let mut yre = vec![0.0; n];
    let mut yim = vec![0.0; n];
    for k in 0..n - 2 {
        let m = n - k - 1; // reflector length, rows k+1..n
        let mut xnorm2 = 0.0;
        for i in k + 1..n {
            xnorm2 += hre[i * n + k] * hre[i * n + k] + him[i * n + k] * him[i * n + k];
        }
        if xnorm2 <= f64::MIN_POSITIVE {
            continue;
        }
        let x0re = hre[(k + 1) * n + k];
        let x0im = him[(k + 1) * n + k];
        let x0abs = (x0re * x0re + x0im * x0im).sqrt();
        let xnorm = xnorm2.sqrt();
        let (phre, phim) = if x0abs > 0.0 { (x0re / x0abs, x0im / x0abs) } else { (1.0, 0.0) };
        let sre = phre * xnorm;
        let sim = phim * xnorm;
        for i in 0..m {
            wre[i] = hre[(k + 1 + i) * n + k];
            wim[i] = him[(k + 1 + i) * n + k];
        }
        wre[0] += sre;
        wim[0] += sim;
        // ||w||^2 = 2(||x||^2 + |x_0| ||x||), so tau w*x = 1 exactly
        let tau = 1.0 / (xnorm2 + x0abs * xnorm);

        // left: rows k+1..n, cols k+1..n; y = w* A, then A -= tau w y
        yre[k + 1..n].fill(0.0);
        yim[k + 1..n].fill(0.0);
        for i in 0..m {
            let (wr, wi) = (wre[i], wim[i]);
            let row = (k + 1 + i) * n;
            let ar = &hre[row + k + 1..row + n];
            let ai = &him[row + k + 1..row + n];
            let yr = &mut yre[k + 1..n];
            let yi = &mut yim[k + 1..n];
            for j in 0..m {
                yr[j] += wr * ar[j] + wi * ai[j];
                yi[j] += wr * ai[j] - wi * ar[j];
            }
        }
        for i in 0..m {
            let (wr, wi) = (tau * wre[i], tau * wim[i]);
            let row = (k + 1 + i) * n;
            let ar = &mut hre[row + k + 1..row + n];
            let ai = &mut him[row + k + 1..row + n];
            let yr = &yre[k + 1..n];
            let yi = &yim[k + 1..n];
            for j in 0..m {
                let t_re = wr * yr[j] - wi * yi[j];
                let t_im = wr * yi[j] + wi * yr[j];
                ar[j] -= t_re;
                ai[j] -= t_im;
            }
        }

        // right: all rows, cols k+1..n; u = A w, then A -= tau u w*
        for r in 0..n {
            let row = r * n;
            let ar = &hre[row + k + 1..row + n];
            let ai = &him[row + k + 1..row + n];
            let mut ur = 0.0;
            let mut ui = 0.0;
            for j in 0..m {
                ur += ar[j] * wre[j] - ai[j] * wim[j];
                ui += ar[j] * wim[j] + ai[j] * wre[j];
            }
            let (ur, ui) = (tau * ur, tau * ui);
            let ar = &mut hre[row + k + 1..row + n];
            let ai = &mut him[row + k + 1..row + n];
            for j in 0..m {
                // u * conj(w)
                let t_re = ur * wre[j] + ui * wim[j];
                let t_im = ui * wre[j] - ur * wim[j];
                ar[j] -= t_re;
                ai[j] -= t_im;
            }
        }

        hre[(k + 1) * n + k] = -sre;
        him[(k + 1) * n + k] = -sim;
        for i in k + 2..n {
            hre[i * n + k] = 0.0;
            him[i * n + k] = 0.0;
        }
    }
}

/// Complex Givens rotation: unitary [[c, s], [-conj(s), c]] with real c >= 0
/// mapping (f, g) to (r, 0).
#[inline]
fn clartg(fre: f64, fim: f64, gre: f64, gim: f64) -> (f64, f64, f64, f64, f64) {
    let fa2 = fre * fre + fim * fim;
    let ga2 = gre * gre + gim * gim;
    if ga2 == 0.0 {
        return (1.0, 0.0, 0.0, fre, fim);
    }
    if fa2 == 0.0 {
        let ga = ga2.sqrt();
        // s = conj(g)/|g|, r = |g|
        return (0.0, gre / ga, -gim / ga, ga, 0.0);
    }
    let fa = fa2.sqrt();
    let h = (fa2 + ga2).sqrt();
    let c = fa / h;
    // s = (f/|f|) conj(g) / h
    let pr = fre / fa;
    let pi = fim / fa;
    let sre = (pr * gre + pi * gim) / h;
    let sim = (pi * gre - pr * gim) / h;
    (c, sre, sim, pr * h, pi * h)
}

fn qr_eigenvalues(hre: &mut [f64], him: &mut [f64], n: usize) -> Result<Vec<Complex64>, SpectralError> {
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    if n == 1 {
        eig[0] = Complex64::new(hre[0], him[0]);
        return Ok(eig);
    }
    let mut rot_c = vec![0.0; n];
    let mut rot_sr = vec![0.0; n];
    let mut rot_si = vec![0.0; n];
    let eps = f64::EPSILON;
    let mut iend = n - 1;
    let mut since_deflation = 0usize;
    let mut total = 0usize;
    let max_total = 40 * n;
    loop {
        if iend == 0 {
            eig[0] = Complex64::new(hre[0], him[0]);
            break;
        }
        // start of the unreduced block ending at iend
        let mut l = iend;
        while l > 0 {
            let sub = cabs1(hre[l * n + l - 1], him[l * n + l - 1]);
            let denom = cabs1(hre[(l - 1) * n + l - 1], him[(l - 1) * n + l - 1])
                + cabs1(hre[l * n + l], him[l * n + l]);
            if sub <= eps * denom || sub < f64::MIN_POSITIVE {
                hre[l * n + l - 1] = 0.0;
                him[l * n + l - 1] = 0.0;
                break;
            }
            l -= 1;
        }
        if l == iend {
            eig[iend] = Complex64::new(hre[iend * n + iend], him[iend * n + iend]);
            iend -= 1;
            since_deflation = 0;
            continue;
        }
        if l + 1 == iend {
            let a = Complex64::new(hre[l * n + l], him[l * n + l]);
            let b = Complex64::new(hre[l * n + l + 1], him[l * n + l + 1]);
            let c = Complex64::new(hre[(l + 1) * n + l], him[(l + 1) * n + l]);
            let d = Complex64::new(hre[(l + 1) * n + l + 1], him[(l + 1) * n + l + 1]);
            let (e1, e2) = eig2(a, b, c, d);
            eig[l] = e1;
            eig[iend] = e2;
            if l == 0 {
                break;
            }
            iend = l - 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        if total > max_total {
            return Err(SpectralError::NonConvergence { index: iend });
        }
        since_deflation += 1;
        let mu = if since_deflation % 10 == 0 {
            // exceptional shift breaks symmetry-induced stalls
            let sub = cabs1(hre[iend * n + iend - 1], him[iend * n + iend - 1]);
            Complex64::new(hre[iend * n + iend] + 0.75 * sub, him[iend * n + iend])
        } else {
            let a = Complex64::new(hre[(iend - 1) * n + iend - 1], him[(iend - 1) * n + iend - 1]);
            let b = Complex64::new(hre[(iend - 1) * n + iend], him[(iend - 1) * n + iend]);
            let c = Complex64::new(hre[iend * n + iend - 1], him[iend * n + iend - 1]);
            let d = Complex64::new(hre[iend * n + iend], him[iend * n + iend]);
            let (e1, e2) = eig2(a, b, c, d);
            if (e1 - d).norm_sqr() <= (e2 - d).norm_sqr() { e1 } else { e2 }
        };
        chase(hre, him, n, l, iend, mu, &mut rot_c, &mut rot_sr, &mut rot_si);
    }
    Ok(eig)
}

/// Eigenvalues of a complex 2x2 [[a, b], [c, d]].
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powu(2) + b * c;
    let sq = disc.sqrt();
    (half + sq, half - sq)
}

/// Right rotation (cols j, j+1) applied to one row slice:
///   x' =  c x + conj(s) y
///   y' = -s x + c y
#[inline(always)]
fn apply_right(re: &mut [f64], im: &mut [f64], j: usize, c: f64, sre: f64, sim: f64) {
    let (ar, ai) = (re[j], im[j]);
    let (br, bi) = (re[j + 1], im[j + 1]);
    re[j] = c * ar + sre * br + sim * bi;
    im[j] = c * ai + sre * bi - sim * br;
    re[j + 1] = c * br - (sre * ar - sim * ai);
    im[j + 1] = c * bi - (sre * ai + sim * ar);
}

/// Applies the stored right rotations j in [j0, j1) to one row, walking the
/// columns left to right with the active pair value carried in registers;
/// arithmetic is identical to repeated apply_right calls.
#[inline(always)]
fn replay_row(
    re: &mut [f64],
    im: &mut [f64],
    j0: usize,
    j1: usize,
    rot_c: &[f64],
    rot_sr: &[f64],
    rot_si: &[f64],
) {
    if j0 >= j1 {
        return;
    }
    let re = &mut re[..j1 + 1];
    let im = &mut im[..j1 + 1];
    let mut cxr = re[j0];
    let mut cxi = im[j0];
    for j in j0..j1 {
        let (c, sr, si) = (rot_c[j], rot_sr[j], rot_si[j]);
        let (yr, yi) = (re[j + 1], im[j + 1]);
        re[j] = c * cxr + sr * yr + si * yi;
        im[j] = c * cxi + sr * yi - si * yr;
        let nxr = c * yr - (sr * cxr - si * cxi);
        let nxi = c * yi - (sr * cxi + si * cxr);
        cxr = nxr;
        cxi = nxi;
    }
    re[j1] = cxr;
    im[j1] = cxi;
}

/// One implicit single-shift QR sweep on the window [l, iend].
///
/// Left rotations and the three bulge rows of each right rotation are applied
/// eagerly; the remaining right-rotation rows are deferred and replayed in a
/// single row-contiguous pass after the sweep. Row and column operations
/// commute, so the deferral only reorders roundoff.
#[allow(clippy::too_many_arguments)]
fn chase(
    hre: &mut [f64],
    him: &mut [f64],
    n: usize,
    l: usize,
    iend: usize,
    mu: Complex64,
    rot_c: &mut [f64],
    rot_sr: &mut [f64],
    rot_si: &mut [f64],
) {
    for k in l..iend {
        let (fre, fim, gre, gim) = if k == l {
            (
                hre[l * n + l] - mu.re,
                him[l * n + l] - mu.im,
                hre[(l + 1) * n + l],
                him[(l + 1) * n + l],
            )
        } else {
            (
                hre[k * n + k - 1],
                him[k * n + k - 1],
                hre[(k + 1) * n + k - 1],
                him[(k + 1) * n + k - 1],
            )
        };
        let (c, sre, sim, rre, rim) = clartg(fre, fim, gre, gim);
        if k > l {
            hre[k * n + k - 1] = rre;
            him[k * n + k - 1] = rim;
            hre[(k + 1) * n + k - 1] = 0.0;
            him[(k + 1) * n + k - 1] = 0.0;
        }

        // rows (k, k+1), cols k..=iend:
        //   x' =  c x + s y
        //   y' = -conj(s) x + c y
        {
            let base = k * n;
            let (top_re, bot_re) = hre[base..base + 2 * n].split_at_mut(n);
            let (top_im, bot_im) = him[base..base + 2 * n].split_at_mut(n);
            let (xr, xi) = (&mut top_re[k..=iend], &mut top_im[k..=iend]);
            let (yr, yi) = (&mut bot_re[k..=iend], &mut bot_im[k..=iend]);
            for j in 0..xr.len() {
                let (ar, ai) = (xr[j], xi[j]);
                let (br, bi) = (yr[j], yi[j]);
                xr[j] = c * ar + sre * br - sim * bi;
                xi[j] = c * ai + sre * bi + sim * br;
                yr[j] = c * br - (sre * ar + sim * ai);
                yi[j] = c * bi - (sre * ai - sim * ar);
            }
        }

        // cols (k, k+1): the chase front only ever reads rows k..k+2, so
        // those are updated now and rows l..k-1 wait for the replay pass
        let rmax = (k + 2).min(iend);
        for r in k..=rmax {
            let base = r * n;
            apply_right(&mut hre[base..base + n], &mut him[base..base + n], k, c, sre, sim);
        }
        rot_c[k] = c;
        rot_sr[k] = sre;
        rot_si[k] = sim;
    }

    // replay: row r is owed every rotation j >= r+1, walked left to right
    // along the row with the active column value carried in registers; four
    // rows at a time keep four independent rotation chains in flight
    if iend >= l + 2 {
        let last = iend - 2;
        let mut r = l;
        while r + 3 <= last {
            let base = r * n;
            let (re0, rest_re) = hre[base..base + 4 * n].split_at_mut(n);
            let (re1, rest_re) = rest_re.split_at_mut(n);
            let (re2, re3) = rest_re.split_at_mut(n);
            let (im0, rest_im) = him[base..base + 4 * n].split_at_mut(n);
            let (im1, rest_im) = rest_im.split_at_mut(n);
            let (im2, im3) = rest_im.split_at_mut(n);
            // ragged starts: bring the first three rows to the common column
            let j0 = (r + 4).min(iend);
            replay_row(re0, im0, r + 1, j0, rot_c, rot_sr, rot_si);
            replay_row(re1, im1, r + 2, j0, rot_c, rot_sr, rot_si);
            replay_row(re2, im2, r + 3, j0, rot_c, rot_sr, rot_si);
            if j0 < iend {
                let (re0, im0) = (&mut re0[..iend + 1], &mut im0[..iend + 1]);
                let (re1, im1) = (&mut re1[..iend + 1], &mut im1[..iend + 1]);
                let (re2, im2) = (&mut re2[..iend + 1], &mut im2[..iend + 1]);
                let (re3, im3) = (&mut re3[..iend + 1], &mut im3[..iend + 1]);
                let (mut x0r, mut x0i) = (re0[j0], im0[j0]);
                let (mut x1r, mut x1i) = (re1[j0], im1[j0]);
                let (mut x2r, mut x2i) = (re2[j0], im2[j0]);
                let (mut x3r, mut x3i) = (re3[j0], im3[j0]);
                for j in j0..iend {
                    let (c, sr, si) = (rot_c[j], rot_sr[j], rot_si[j]);
                    let (yr, yi) = (re0[j + 1], im0[j + 1]);
                    re0[j] = c * x0r + sr * yr + si * yi;
                    im0[j] = c * x0i + sr * yi - si * yr;
                    let nr = c * yr - (sr * x0r - si * x0i);
                    let ni = c * yi - (sr * x0i + si * x0r);
                    x0r = nr;
                    x0i = ni;
                    let (yr, yi) = (re1[j + 1], im1[j + 1]);
                    re1[j] = c * x1r + sr * yr + si * yi;
                    im1[j] = c * x1i + sr * yi - si * yr;
                    let nr = c * yr - (sr * x1r - si * x1i);
                    let ni = c * yi - (sr * x1i + si * x1r);
                    x1r = nr;
                    x1i = ni;
                    let (yr, yi) = (re2[j + 1], im2[j + 1]);
                    re2[j] = c * x2r + sr * yr + si * yi;
                    im2[j] = c * x2i + sr * yi - si * yr;
                    let nr = c * yr - (sr * x2r - si * x2i);
                    let ni = c * yi - (sr * x2i + si * x2r);
                    x2r = nr;
                    x2i = ni;
                    let (yr, yi) = (re3[j + 1], im3[j + 1]);
                    re3[j] = c * x3r + sr * yr + si * yi;
                    im3[j] = c * x3i + sr * yi - si * yr;
                    let nr = c * yr - (sr * x3r - si * x3i);
                    let ni = c * yi - (sr * x3i + si * x3r);
                    x3r = nr;
                    x3i = ni;
                }
                re0[iend] = x0r;
                im0[iend] = x0i;
                re1[iend] = x1r;
                im1[iend] = x1i;
                re2[iend] = x2r;
                im2[iend] = x2i;
                re3[iend] = x3r;
                im3[iend] = x3i;
            }
            r += 4;
        }
        while r <= last {
            let base = r * n;
            replay_row(
                &mut hre[base..base + n],
                &mut him[base..base + n],
                r + 1,
                iend,
                rot_c,
                rot_sr,
                rot_si,
            );
            r += 1;
        }
    }
}
