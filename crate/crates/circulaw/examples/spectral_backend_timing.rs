//! Times the two dense kernels across sizes. The universality experiment
//! spends nearly all of its budget in n = 512 eigensolves, so this probe is
//! the first thing to run on new hardware.

use circulaw::ensemble::{sample_ginibre, Field};
use circulaw::spectral::{complex_eigenvalues, singular_values, singular_values_only};
use num_complex::Complex64;
use std::time::Instant;

fn main() {
    println!("{:>6} {:>12} {:>12} {:>12}", "n", "eig (s)", "svd full (s)", "sv only (s)");
    for &n in &[64usize, 128, 256, 512] {
        let x = sample_ginibre(n, Field::Complex, 1, 0).expect("sample");
        let z = Complex64::new(0.8, 0.1);

        let reps = if n <= 128 { 3 } else { 1 };
        let t = Instant::now();
        for _ in 0..reps {
            let ev = complex_eigenvalues(&x).expect("eig");
            assert_eq!(ev.n(), n);
        }
        let t_eig = t.elapsed().as_secs_f64() / reps as f64;

        let t = Instant::now();
        let hs = singular_values(&x, z).expect("svd");
        let t_svd = t.elapsed().as_secs_f64();
        assert_eq!(hs.n(), n);

        let t = Instant::now();
        let s = singular_values_only(&x, z).expect("sv");
        let t_sv = t.elapsed().as_secs_f64();
        assert_eq!(s.len(), n);

        println!("{:>6} {:>12.4} {:>12.4} {:>12.4}", n, t_eig, t_svd, t_sv);
    }
}
