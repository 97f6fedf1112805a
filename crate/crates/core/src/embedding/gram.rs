use nalgebra::DMatrix;

use crate::error::Result;
use crate::linalg::{ensure_symmetric, SortedEigen};

/// Squared distances induced by a Gram matrix:
/// `D_ij = B_ii + B_jj - B_ij - B_ji`.
pub fn b_to_d(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    ensure_symmetric(b)?;
    Ok(gram_to_sq_dists(b))
}

pub(crate) fn gram_to_sq_dists(b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            b[(i, i)] + b[(j, j)] - b[(i, j)] - b[(j, i)]
        }
    })
}

/// `-½·H·Δ·H` with the centering matrix `H = I - 11ᵀ/N`.
pub fn double_center(delta: &DMatrix<f64>) -> DMatrix<f64> {
    let n = delta.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let nf = n as f64;
    let row_means: alloc::vec::Vec<f64> = delta.row_iter().map(|r| r.sum() / nf).collect();
    let col_means: alloc::vec::Vec<f64> = delta.column_iter().map(|c| c.sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (delta[(i, j)] - row_means[i] - col_means[j] + grand)
    })
}

/// Nearest positive semidefinite matrix in Frobenius norm: negative
/// eigenvalues are clipped to zero.
pub fn psd_project(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    ensure_symmetric(b)?;
    Ok(SortedEigen::new(b).reconstruct_with(|l| l.max(0.0)))
}

/// A symmetric Gram matrix together with the squared distances it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct GramState {
    b: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl GramState {
    pub fn new(b: DMatrix<f64>) -> Result<Self> {
        let d = b_to_d(&b)?;
        Ok(GramState { b, d })
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn distances(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn into_gram(self) -> DMatrix<f64> {
        self.b
    }
}
