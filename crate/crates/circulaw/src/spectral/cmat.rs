//! Dense complex matrices with split real/imaginary storage.
//!
//! Row-major, with `re` and `im` in separate buffers so the factorization
//! inner loops run over contiguous f64 slices the compiler can vectorize.

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    n_rows: usize,
    n_cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl CMat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CMat { n_rows, n_cols, re: vec![0.0; n_rows * n_cols], im: vec![0.0; n_rows * n_cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.re[i * n + i] = 1.0;
        }
        m
    }

    /// Builds entry (i, j) from `f`, called in row-major order.
    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(
        n_rows: usize,
        n_cols: usize,
        mut f: F,
    ) -> Self {
        let mut m = CMat::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                let v = f(i, j);
                m.re[i * n_cols + j] = v.re;
                m.im[i * n_cols + j] = v.im;
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let idx = i * self.n_cols + j;
        Complex64::new(self.re[idx], self.im[idx])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let idx = i * self.n_cols + j;
        self.re[idx] = v.re;
        self.im[idx] = v.im;
    }

    /// Split-borrow of row i: (re, im).
    #[inline]
    pub fn row(&self, i: usize) -> (&[f64], &[f64]) {
        let a = i * self.n_cols;
        let b = a + self.n_cols;
        (&self.re[a..b], &self.im[a..b])
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> (&mut [f64], &mut [f64]) {
        let a = i * self.n_cols;
        let b = a + self.n_cols;
        (&mut self.re[a..b], &mut self.im[a..b])
    }

    /// Disjoint mutable borrows of rows i and j (i != j), as (re_i, im_i, re_j, im_j).
    pub fn two_rows_mut(&mut self, i: usize, j: usize) -> (&mut [f64], &mut [f64], &mut [f64], &mut [f64]) {
        assert_ne!(i, j);
        let c = self.n_cols;
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let (re_a, re_b) = self.re.split_at_mut(hi * c);
        let (im_a, im_b) = self.im.split_at_mut(hi * c);
        let re_lo = &mut re_a[lo * c..lo * c + c];
        let im_lo = &mut im_a[lo * c..lo * c + c];
        let re_hi = &mut re_b[..c];
        let im_hi = &mut im_b[..c];
        if i < j {
            (re_lo, im_lo, re_hi, im_hi)
        } else {
            (re_hi, im_hi, re_lo, im_lo)
        }
    }

    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                let idx = i * self.n_cols + j;
                let t = j * self.n_rows + i;
                out.re[t] = self.re[idx];
                out.im[t] = -self.im[idx];
            }
        }
        out
    }

    /// self * rhs, (i, k, j) loop order so the inner updates stream over rows.
    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.n_cols, rhs.n_rows);
        let mut out = CMat::zeros(self.n_rows, rhs.n_cols);
        let w = rhs.n_cols;
        for i in 0..self.n_rows {
            let orow = i * w;
            for k in 0..self.n_cols {
                let a = i * self.n_cols + k;
                let (ar, ai) = (self.re[a], self.im[a]);
                if ar == 0.0 && ai == 0.0 {
                    continue;
                }
                let brow = k * w;
                for j in 0..w {
                    let br = rhs.re[brow + j];
                    let bi = rhs.im[brow + j];
                    out.re[orow + j] += ar * br - ai * bi;
                    out.im[orow + j] += ar * bi + ai * br;
                }
            }
        }
        out
    }

    /// self^H * rhs without materializing the adjoint.
    pub fn adjoint_mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.n_rows, rhs.n_rows);
        let mut out = CMat::zeros(self.n_cols, rhs.n_cols);
        let w = rhs.n_cols;
        for k in 0..self.n_rows {
            let brow = k * w;
            for i in 0..self.n_cols {
                let a = k * self.n_cols + i;
                let (ar, ai) = (self.re[a], -self.im[a]);
                if ar == 0.0 && ai == 0.0 {
                    continue;
                }
                let orow = i * w;
                for j in 0..w {
                    let br = rhs.re[brow + j];
                    let bi = rhs.im[brow + j];
                    out.re[orow + j] += ar * br - ai * bi;
                    out.im[orow + j] += ar * bi + ai * br;
                }
            }
        }
        out
    }

    /// Matrix-vector product; x split as (re, im) slices of length n_cols.
    pub fn matvec(&self, xre: &[f64], xim: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(xre.len(), self.n_cols);
        let mut yre = vec![0.0; self.n_rows];
        let mut yim = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            let row = i * self.n_cols;
            let mut sr = 0.0;
            let mut si = 0.0;
            for j in 0..self.n_cols {
                let ar = self.re[row + j];
                let ai = self.im[row + j];
                sr += ar * xre[j] - ai * xim[j];
                si += ar * xim[j] + ai * xre[j];
            }
            yre[i] = sr;
            yim[i] = si;
        }
        (yre, yim)
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.n_rows, self.n_cols), (rhs.n_rows, rhs.n_cols));
        let mut out = self.clone();
        for (a, b) in out.re.iter_mut().zip(&rhs.re) {
            *a -= b;
        }
        for (a, b) in out.im.iter_mut().zip(&rhs.im) {
            *a -= b;
        }
        out
    }

    pub fn scale_complex(&mut self, s: Complex64) {
        for (r, i) in self.re.iter_mut().zip(self.im.iter_mut()) {
            let (a, b) = (*r, *i);
            *r = s.re * a - s.im * b;
            *i = s.re * b + s.im * a;
        }
    }

    pub fn frobenius(&self) -> f64 {
        let s: f64 = self.re.iter().map(|x| x * x).sum::<f64>()
            + self.im.iter().map(|x| x * x).sum::<f64>();
        s.sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.n_rows, self.n_cols);
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..self.n_rows {
            t += self.get(i, i);
        }
        t
    }

    /// Row-major Vec<Complex64> copy, for interop with the reference oracles.
    pub fn to_complex_vec(&self) -> Vec<Complex64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    }
}
