//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// `a` raised to a non-negative integer power.
pub fn mat_pow(a: &Mat, k: usize) -> Mat {
    let mut out = Mat::identity(a.nrows(), a.ncols());
    for _ in 0..k {
        out = &out * a;
    }
    out
}

/// Powers `I, A, A², …, A^k`.
pub fn powers(a: &Mat, k: usize) -> Vec<Mat> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(Mat::identity(a.nrows(), a.ncols()));
    for i in 1..=k {
        let next = &out[i - 1] * a;
        out.push(next);
    }
    out
}

/// Copies `block` into `m` at `(row, col)`.
pub fn set_block(m: &mut Mat, row: usize, col: usize, block: &Mat) {
    m.view_mut((row, col), (block.nrows(), block.ncols())).copy_from(block);
}

/// Block-diagonal matrix with `count` copies of `block`.
pub fn block_diag_repeat(block: &Mat, count: usize) -> Mat {
    let (r, c) = block.shape();
    let mut m = Mat::zeros(r * count, c * count);
    for i in 0..count {
        set_block(&mut m, i * r, i * c, block);
    }
    m
}

/// Block-diagonal matrix from a list of blocks.
pub fn block_diag(blocks: &[Mat]) -> Mat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut m = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        set_block(&mut m, r, c, b);
        r += b.nrows();
        c += b.ncols();
    }
    m
}

/// Kronecker product.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Extreme eigenvalues of a symmetric matrix.
pub fn symmetric_eig_range(a: &Mat) -> (f64, f64) {
    let sym = 0.5 * (a + a.transpose());
    let ev = sym.symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Cholesky factor of a symmetric positive-definite matrix, or `IllPosedWeights`.
pub fn cholesky(h: Mat, what: &str) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::IllPosedWeights(format!("{what}: non-finite entries")));
    }
    nalgebra::Cholesky::new(h).ok_or_else(|| Error::IllPosedWeights(format!("{what} is not positive definite")))
}

/// Checks that a square weight matrix is symmetric positive semidefinite.
pub fn check_psd(w: &Mat, what: &str) -> Result<()> {
    if !w.is_square() {
        return Err(Error::InvalidConfig(format!("{what} must be square")));
    }
    let asym = (w - w.transpose()).abs().max();
    if asym > 1e-12 * (1.0 + w.abs().max()) {
        return Err(Error::InvalidConfig(format!("{what} must be symmetric")));
    }
    if w.nrows() > 0 {
        let (lo, _) = symmetric_eig_range(w);
        if lo < -1e-12 * (1.0 + w.abs().max()) {
            return Err(Error::InvalidConfig(format!("{what} must be positive semidefinite")));
        }
    }
    Ok(())
}

/// Stacks `count` copies of a vector.
pub fn repeat_vec(v: &Vector, count: usize) -> Vector {
    let n = v.len();
    Vector::from_fn(n * count, |i, _| v[i % n])
}

/// Block `k` (of size `size`) of a stacked vector.
pub fn block(v: &Vector, k: usize, size: usize) -> Vector {
    v.rows(k * size, size).into_owned()
}

pub fn inf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
