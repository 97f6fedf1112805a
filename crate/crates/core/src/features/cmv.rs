//! Per-instance updates: C-MV and the squared-error / Cauchy baselines.

use alloc::vec::Vec;

use num_traits::Float;
use nalgebra::{DMatrix, DVector};

use super::{check_shapes, residuals_sq, MultiViewFeatureSet};
use crate::error::Result;
use crate::linalg::{spd_solve, spd_solve_vec};
use crate::loss::{cauchy_weight, correntropy_weight, hq_g, CauchyScale, KernelSize};

/// `a_i^(v) = -exp(-‖z_i^(v) - W_v x_i‖² / (2σ²))`, as an `M × N` matrix.
pub fn cmv_update_a(
    fs: &MultiViewFeatureSet,
    x: &DMatrix<f64>,
    w: &[DMatrix<f64>],
    sigma: KernelSize,
) -> Result<DMatrix<f64>> {
    per_instance_weights(fs, x, w, |r| correntropy_weight(r, sigma))
}

/// Cauchy reweighting `-1/(1 + ‖z_i - W x_i‖²/c²)`.
pub fn cauchymv_update_a(
    fs: &MultiViewFeatureSet,
    x: &DMatrix<f64>,
    w: &[DMatrix<f64>],
    c: CauchyScale,
) -> Result<DMatrix<f64>> {
    per_instance_weights(fs, x, w, |r| cauchy_weight(r, c))
}

fn per_instance_weights(
    fs: &MultiViewFeatureSet,
    x: &DMatrix<f64>,
    w: &[DMatrix<f64>],
    rule: impl Fn(f64) -> f64,
) -> Result<DMatrix<f64>> {
    check_shapes(fs, Some(x), Some(w))?;
    let mut a = DMatrix::zeros(fs.n_views(), fs.n_instances());
    for (v, (z, wv)) in fs.views().iter().zip(w).enumerate() {
        for (i, r) in residuals_sq(z, wv, x).into_iter().enumerate() {
            a[(v, i)] = rule(r);
        }
    }
    Ok(a)
}

/// Latent update: every `x_i` minimizes
/// `Σ_v p_i^(v)‖z_i^(v) - W_v x_i‖² + c2‖x_i‖²` with `p = -a > 0`.
pub fn cmv_update_x(
    fs: &MultiViewFeatureSet,
    w: &[DMatrix<f64>],
    a: &DMatrix<f64>,
    c2: f64,
) -> Result<DMatrix<f64>> {
    check_shapes(fs, None, Some(w))?;
    let d = w[0].ncols();
    let n = fs.n_instances();
    let grams: Vec<DMatrix<f64>> = w.iter().map(|wv| wv.tr_mul(wv)).collect();
    let projected: Vec<DMatrix<f64>> =
        w.iter().zip(fs.views()).map(|(wv, z)| wv.tr_mul(z)).collect();

    let mut x = DMatrix::zeros(d, n);
    for i in 0..n {
        let mut lhs = DMatrix::<f64>::identity(d, d) * c2;
        let mut rhs = DVector::<f64>::zeros(d);
        for v in 0..fs.n_views() {
            let p = -a[(v, i)];
            debug_assert!(p > 0.0);
            lhs += &grams[v] * p;
            rhs.axpy(p, &projected[v].column(i), 1.0);
        }
        x.set_column(i, &spd_solve_vec(lhs, &rhs));
    }
    Ok(x)
}

/// Map update: every `W_v` minimizes
/// `Σ_i p_i^(v)‖z_i^(v) - W_v x_i‖² + c1‖W_v‖_F²`.
pub fn cmv_update_w(
    fs: &MultiViewFeatureSet,
    x: &DMatrix<f64>,
    a: &DMatrix<f64>,
    c1: f64,
) -> Result<Vec<DMatrix<f64>>> {
    check_shapes(fs, Some(x), None)?;
    let d = x.nrows();
    Ok(fs
        .views()
        .iter()
        .enumerate()
        .map(|(v, z)| {
            // X·P, with P the diagonal of positive weights
            let mut xp = x.clone();
            for (i, mut col) in xp.column_iter_mut().enumerate() {
                col *= -a[(v, i)];
            }
            let mut lhs = &xp * x.transpose();
            for k in 0..d {
                lhs[(k, k)] += c1;
            }
            // (X P Xᵀ + c1 I) W_vᵀ = X P Zᵀ
            spd_solve(lhs, &(&xp * z.transpose())).transpose()
        })
        .collect())
}

/// Half-quadratic objective
/// `R3 = Σ_v Σ_i [a_i^(v)·r_i^(v)/(2σ²) - g(a_i^(v))] - (c1 Σ‖W_v‖² + c2 Σ‖x_i‖²)/(2σ²)`.
///
/// At the weights returned by [`cmv_update_a`] it equals
/// `Σ exp(-r/(2σ²))` minus the same penalties, and is never above `M·N`.
pub fn cmv_objective(
    fs: &MultiViewFeatureSet,
    x: &DMatrix<f64>,
    w: &[DMatrix<f64>],
    a: &DMatrix<f64>,
    sigma: KernelSize,
    c1: f64,
    c2: f64,
) -> Result<f64> {
    check_shapes(fs, Some(x), Some(w))?;
    let tv = sigma.two_var();
    let mut total = 0.0;
    for (v, (z, wv)) in fs.views().iter().zip(w).enumerate() {
        for (i, r) in residuals_sq(z, wv, x).into_iter().enumerate() {
            let av = a[(v, i)];
            total += av * r / tv - hq_g(av);
        }
    }
    Ok(total - penalty(x, w, c1, c2) / tv)
}

/// `-(Σ‖z - Wx‖² + c1 Σ‖W_v‖² + c2 Σ‖x_i‖²)`, negated so that the
/// squared-error baseline also ascends.
pub fn l2mv_objective(
    fs: &MultiViewFeatureSet,
    x: &DMatrix<f64>,
    w: &[DMatrix<f64>],
    c1: f64,
    c2: f64,
) -> Result<f64> {
    check_shapes(fs, Some(x), Some(w))?;
    let data: f64 = fs
        .views()
        .iter()
        .zip(w)
        .map(|(z, wv)| (z - wv * x).norm_squared())
        .sum();
    Ok(-(data + penalty(x, w, c1, c2)))
}

/// `-(Σ log(1 + r/c²) + (c1 Σ‖W_v‖² + c2 Σ‖x_i‖²)/c²)`.
pub fn cauchymv_objective(
    fs: &MultiViewFeatureSet,
    x: &DMatrix<f64>,
    w: &[DMatrix<f64>],
    c: CauchyScale,
    c1: f64,
    c2: f64,
) -> Result<f64> {
    check_shapes(fs, Some(x), Some(w))?;
    let c_sq = c.get() * c.get();
    let mut data = 0.0;
    for (z, wv) in fs.views().iter().zip(w) {
        data += residuals_sq(z, wv, x)
            .into_iter()
            .map(|r| (r / c_sq).ln_1p())
            .sum::<f64>();
    }
    Ok(-(data + penalty(x, w, c1, c2) / c_sq))
}

fn penalty(x: &DMatrix<f64>, w: &[DMatrix<f64>], c1: f64, c2: f64) -> f64 {
    c1 * w.iter().map(|m| m.norm_squared()).sum::<f64>() + c2 * x.norm_squared()
}
