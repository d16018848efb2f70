//! Small dense helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Symmetric part `S(A) = (A + Aᵗ)/2`.
pub fn sym(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

/// Trace inner product `tr(A Bᵗ)`.
pub fn frob_dot(a: &Mat, b: &Mat) -> f64 {
    a.dot(b)
}

pub fn block_diag(hq: &Mat, hn: &Mat) -> Mat {
    let (q, n) = (hq.nrows(), hn.nrows());
    let mut h = Mat::zeros(q + n, q + n);
    h.view_mut((0, 0), (q, q)).copy_from(hq);
    h.view_mut((q, q), (n, n)).copy_from(hn);
    h
}

/// Largest entry of `h` outside the diagonal blocks of sizes `q` and `n`.
pub fn off_block_norm(h: &Mat, q: usize) -> f64 {
    let d = h.nrows();
    let mut m: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if (i < q) != (j < q) {
                m = m.max(h[(i, j)].abs());
            }
        }
    }
    m
}

/// Symmetric positive-definite square root of a symmetric matrix.
pub fn sqrt_spd(p: &Mat) -> Result<Mat> {
    let eig = SymmetricEigen::new(sym(p));
    if eig.eigenvalues.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    let d = Mat::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    Ok(sym(&(&eig.eigenvectors * d * eig.eigenvectors.transpose())))
}

/// Matrix exponential.
pub fn expm(a: &Mat) -> Mat {
    a.clone().exp()
}

pub fn is_finite(a: &Mat) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Orthonormal basis of the numerical null space of `a` (as columns), with
/// singular values below `rel_tol * σ_max` treated as zero.
pub fn null_space(a: &Mat, rel_tol: f64) -> Mat {
    let cols = a.ncols();
    if cols == 0 {
        return Mat::zeros(0, 0);
    }
    // pad so the SVD hands back a full right factor
    let rows = a.nrows().max(cols);
    let mut padded = Mat::zeros(rows, cols);
    padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.max();
    let cut = rel_tol * smax;
    let kernel: Vec<_> = (0..cols)
        .filter(|&i| smax == 0.0 || svd.singular_values[i] < cut)
        .map(|i| v_t.row(i).transpose())
        .collect();
    if kernel.is_empty() {
        Mat::zeros(cols, 0)
    } else {
        Mat::from_columns(&kernel)
    }
}

pub fn rows_of(a: &Mat) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
}
