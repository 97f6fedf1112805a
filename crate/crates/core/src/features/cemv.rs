//! Entrywise updates (Ce-MV): one weight per feature entry `z_ij^(v)`.
//!
//! The latent update averages each view over its `d_v` rows; the per-row map
//! update carries no such factor. The objective traced by [`cemv_objective`]
//! is the one these closed forms maximize block by block:
//!
//! ```text
//! R3 = Σ_v κ_v Σ_ij [a_ij r_ij²/(2σ_v²) - g(a_ij)]
//!      - (Σ_v (c1/d_v)‖W_v‖² + c2 Σ_i ‖x_i‖²) / (2σ²),   κ_v = σ_v²/(σ² d_v)
//! ```
//!
//! With a common kernel size (`σ_v = σ`) this is the view-balanced entrywise
//! correntropy with weights `1/d_v`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{check_shapes, MultiViewFeatureSet};
use crate::error::{Error, Result};
use crate::linalg::spd_solve_vec;
use crate::loss::{correntropy_weight, hq_g, KernelSize};

fn check_entry_weights(fs: &MultiViewFeatureSet, a: &[DMatrix<f64>]) -> Result<()> {
    if a.len() != fs.n_views() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{} weight blocks for {} views",
            a.len(),
            fs.n_views()
        )));
    }
    for (av, z) in a.iter().zip(fs.views()) {
        if av.shape() != z.shape() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "weight block {:?} does not match view {:?}",
                av.shape(),
                z.shape()
            )));
        }
    }
    Ok(())
}

/// `a_ij^(v) = -exp(-(z_ij^(v) - W_j^(v) x_i)² / (2σ_v²))`.
pub fn cemv_update_a(
    fs: &MultiViewFeatureSet,
    x: &DMatrix<f64>,
    w: &[DMatrix<f64>],
    view_sigmas: &[KernelSize],
) -> Result<Vec<DMatrix<f64>>> {
    check_shapes(fs, Some(x), Some(w))?;
    Ok(fs
        .views()
        .iter()
        .zip(w)
        .zip(view_sigmas)
        .map(|((z, wv), &s)| (z - wv * x).map(|r| correntropy_weight(r * r, s)))
        .collect())
}

/// Latent update: every `x_i` minimizes
/// `Σ_v (1/d_v) Σ_j p_ij (z_ij - W_j x_i)² + c2‖x_i‖²`.
pub fn cemv_update_x(
    fs: &MultiViewFeatureSet,
    w: &[DMatrix<f64>],
    a: &[DMatrix<f64>],
    c2: f64,
) -> Result<DMatrix<f64>> {
    check_shapes(fs, None, Some(w))?;
    check_entry_weights(fs, a)?;
    let d = w[0].ncols();
    let n = fs.n_instances();
    let mut x = DMatrix::zeros(d, n);
    let mut scaled = Vec::with_capacity(fs.n_views());
    for wv in w {
        scaled.push(wv.clone());
    }
    for i in 0..n {
        let mut lhs = DMatrix::<f64>::identity(d, d) * c2;
        let mut rhs = DVector::<f64>::zeros(d);
        for (v, ((z, wv), av)) in fs.views().iter().zip(w).zip(a).enumerate() {
            let inv_dv = 1.0 / z.nrows() as f64;
            // rows of W_v scaled by p_ij / d_v
            let sw = &mut scaled[v];
            for j in 0..z.nrows() {
                let p = -av[(j, i)] * inv_dv;
                debug_assert!(p > 0.0);
                for k in 0..d {
                    sw[(j, k)] = p * wv[(j, k)];
                }
            }
            lhs.gemm_tr(1.0, &*sw, wv, 1.0);
            rhs.gemv_tr(1.0, &*sw, &z.column(i), 1.0);
        }
        x.set_column(i, &spd_solve_vec(lhs, &rhs));
    }
    Ok(x)
}

/// Row update: every row `W_j^(v)` minimizes
/// `Σ_i p_ij (z_ij - W_j x_i)² + c1‖W_j‖²`.
pub fn cemv_update_w(
    fs: &MultiViewFeatureSet,
    x: &DMatrix<f64>,
    a: &[DMatrix<f64>],
    c1: f64,
) -> Result<Vec<DMatrix<f64>>> {
    check_shapes(fs, Some(x), None)?;
    check_entry_weights(fs, a)?;
    let d = x.nrows();
    let n = x.ncols();
    let xt = x.transpose();
    let mut xp = x.clone();
    Ok(fs
        .views()
        .iter()
        .zip(a)
        .map(|(z, av)| {
            let mut wv = DMatrix::zeros(z.nrows(), d);
            for j in 0..z.nrows() {
                for i in 0..n {
                    let p = -av[(j, i)];
                    for k in 0..d {
                        xp[(k, i)] = p * x[(k, i)];
                    }
                }
                let mut lhs = DMatrix::<f64>::identity(d, d) * c1;
                lhs.gemm(1.0, &xp, &xt, 1.0);
                let rhs = &xp * z.row(j).transpose();
                let row = spd_solve_vec(lhs, &rhs);
                wv.set_row(j, &row.transpose());
            }
            wv
        })
        .collect())
}

/// Entrywise half-quadratic objective; see the module docs for its form.
pub fn cemv_objective(
    fs: &MultiViewFeatureSet,
    x: &DMatrix<f64>,
    w: &[DMatrix<f64>],
    a: &[DMatrix<f64>],
    sigma: KernelSize,
    view_sigmas: &[KernelSize],
    c1: f64,
    c2: f64,
) -> Result<f64> {
    check_shapes(fs, Some(x), Some(w))?;
    check_entry_weights(fs, a)?;
    let tv = sigma.two_var();
    let mut total = 0.0;
    let mut pen = c2 * x.norm_squared();
    for (((z, wv), av), &sv) in fs.views().iter().zip(w).zip(a).zip(view_sigmas) {
        let dv = z.nrows() as f64;
        let kappa = sv.get() * sv.get() / (sigma.get() * sigma.get() * dv);
        let tvv = sv.two_var();
        let res = z - wv * x;
        let mut view_sum = 0.0;
        for (r, &aij) in res.iter().zip(av.iter()) {
            view_sum += aij * r * r / tvv - hq_g(aij);
        }
        total += kappa * view_sum;
        pen += c1 / dv * wv.norm_squared();
    }
    Ok(total - pen / tv)
}
