//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Cholesky factor of a Hermitian positive-definite matrix.
///
/// Returns `None` if the matrix is not numerically positive definite.
pub fn hermitian_factor(a: &CMatrix) -> Option<Cholesky<Complex64, Dyn>> {
    debug_assert!(a.is_square());
    Cholesky::new(a.clone())
}

/// Solves `a x = b` for Hermitian positive-definite `a`.
pub fn hermitian_solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    hermitian_factor(a).map(|chol| chol.solve(b))
}

/// Squared Frobenius norm, i.e. `tr{A† A}`.
pub fn frobenius_sq(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Ratio of smallest to largest eigenvalue of a Hermitian PSD matrix.
///
/// Zero when the largest eigenvalue vanishes.
pub fn hermitian_rcond(a: &CMatrix) -> f64 {
    let eig = a.clone().symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if max <= 0.0 {
        0.0
    } else {
        (min / max).max(0.0)
    }
}

/// The `n x n` unitary DFT matrix, entries `exp(-2πi rc/n)/√n`.
pub fn dft_unitary(n: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |r, col| {
        let phase = -2.0 * PI * ((r * col) % n) as f64 / n as f64;
        Complex64::from_polar(scale, phase)
    })
}

/// One `CN(0, 1)` sample: real and imaginary parts each `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. `CN(0, 1)` entries, filled column by column.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Scales row `k` of `a` by `weights[k]`, i.e. computes `diag(weights) a`.
pub fn scale_rows(a: &CMatrix, weights: &[f64]) -> CMatrix {
    debug_assert_eq!(a.nrows(), weights.len());
    let mut out = a.clone();
    for (k, w) in weights.iter().enumerate() {
        out.row_mut(k).scale_mut(*w);
    }
    out
}

/// Scales column `k` of `a` by `weights[k]`, i.e. computes `a diag(weights)`.
pub fn scale_cols(a: &CMatrix, weights: &[f64]) -> CMatrix {
    debug_assert_eq!(a.ncols(), weights.len());
    let mut out = a.clone();
    for (k, w) in weights.iter().enumerate() {
        out.column_mut(k).scale_mut(*w);
    }
    out
}
