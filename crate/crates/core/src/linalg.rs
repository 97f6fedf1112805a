//! Small dense helpers on top of nalgebra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance used when checking a matrix for symmetry.
pub const SYMMETRY_RTOL: f64 = 1e-10;

/// Largest `|A_ij - A_ji|`.
pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

pub fn ensure_square(a: &DMatrix<f64>, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Square and symmetric up to [`SYMMETRY_RTOL`] times the largest entry.
pub fn ensure_symmetric(a: &DMatrix<f64>) -> Result<()> {
    ensure_square(a, "matrix")?;
    let scale = a.amax().max(1.0);
    let asym = max_asymmetry(a);
    if asym > SYMMETRY_RTOL * scale || asym.is_nan() {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// `(A + Aᵀ)/2`
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Eigendecomposition of a symmetric matrix with eigenvalues in descending
/// order; ties keep the solver's original index order.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: DVector<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: DMatrix<f64>,
}

impl SortedEigen {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        // symmetric_eigen reads the lower triangle; feed it an exactly symmetric copy
        let eig = symmetrize(a).symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[j]
                .partial_cmp(&eig.eigenvalues[i])
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        SortedEigen { values, vectors }
    }

    /// `U·diag(f(λ))·Uᵀ`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[k]);
        }
        let out = scaled * self.vectors.transpose();
        symmetrize(&out)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Solves `A·X = B` for symmetric positive-definite `A`.
///
/// Callers only pass ridge-regularized Gram matrices, which are positive
/// definite by construction; failure here is a logic error.
pub fn spd_solve(a: DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let chol = a
        .cholesky()
        .expect("ridge system must be positive definite");
    chol.solve(b)
}

pub fn spd_solve_vec(a: DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let chol = a
        .cholesky()
        .expect("ridge system must be positive definite");
    chol.solve(b)
}

/// Squared Euclidean distances between the rows of `x`.
pub fn pairwise_sq_dists(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut s = 0.0;
            for k in 0..x.ncols() {
                let t = x[(i, k)] - x[(j, k)];
                s += t * t;
            }
            d[(i, j)] = s;
            d[(j, i)] = s;
        }
    }
    d
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}
