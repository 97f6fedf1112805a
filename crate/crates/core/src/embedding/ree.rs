//! Robust Euclidean embedding of one or more dissimilarity views.
//!
//! The objectives sum over the full `N × N` matrices, so each unordered pair
//! is counted twice. The (sub)gradients below follow the chain rule through
//! `D_ij = B_ii + B_jj - B_ij - B_ji` for a single pair orientation, which
//! makes them exactly one half of the gradient of the full-matrix sum. The
//! factor only rescales the step size.

use alloc::format;

use num_traits::Float;
use nalgebra::DMatrix;

use super::gram::{double_center, gram_to_sq_dists, psd_project};
use super::{DissimilarityViews, EmbedConfig, EmbeddingResult};
use crate::error::{Error, Result};
use crate::loss::{abs_pow, GgdParams, KernelSize};
use crate::trace::SolverTrace;

/// Which objective [`ree_fit`] optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReeLoss {
    /// Minimize `Σ W|Δ - D|` by projected subgradient descent.
    L1,
    /// Maximize `Σ W·exp(-λ|Δ - D|^α)` by projected gradient ascent.
    Correntropy,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_d(views: &DissimilarityViews, d: &DMatrix<f64>) -> Result<()> {
    let n = views.n_points();
    if d.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "distance matrix is {:?}, views are {n}x{n}",
            d.shape()
        )));
    }
    Ok(())
}

/// Assembles a gradient with respect to `B` from the per-entry derivative
/// `F_ij = ∂f/∂D_ij`: off-diagonal `-F_ij`, diagonal `Σ_k F_ik`.
fn chain_to_gram(n: usize, mut entry: impl FnMut(usize, usize) -> f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for k in 0..n {
            if k == i {
                continue;
            }
            let f = entry(i, k);
            g[(i, k)] = -f;
            diag += f;
        }
        g[(i, i)] = diag;
    }
    g
}

/// Subgradient of the multi-view L1 objective with respect to `B`, with
/// `sign(0) = 0`.
pub fn mvree_subgradient(views: &DissimilarityViews, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_d(views, d)?;
    let n = views.n_points();
    Ok(chain_to_gram(n, |i, k| {
        views
            .deltas()
            .iter()
            .enumerate()
            .map(|(v, delta)| views.weight(v, i, k) * sign(d[(i, k)] - delta[(i, k)]))
            .sum()
    }))
}

/// Gradient of the (generalized) correntropy objective with respect to `B`.
///
/// For `α = 2` the off-diagonal entries are
/// `Σ_v W·exp(-(Δ - D)²/(2σ²))·(D - Δ)/σ²`.
pub fn cmvree_gradient(
    views: &DissimilarityViews,
    d: &DMatrix<f64>,
    sigma: KernelSize,
    alpha: f64,
) -> Result<DMatrix<f64>> {
    check_d(views, d)?;
    let kernel = GgdParams::with_kernel_size(alpha, sigma)?;
    let n = views.n_points();
    Ok(chain_to_gram(n, |i, k| {
        views
            .deltas()
            .iter()
            .enumerate()
            .map(|(v, delta)| {
                // e = Δ - D, ∂e/∂D = -1
                -views.weight(v, i, k) * kernel.kernel_derivative(delta[(i, k)] - d[(i, k)])
            })
            .sum()
    }))
}

/// `f₀ = Σ_v Σ_ij W_ij^(v)·|Δ_ij^(v) - D_ij|` over the full matrices.
pub fn f0_objective(views: &DissimilarityViews, d: &DMatrix<f64>) -> Result<f64> {
    check_d(views, d)?;
    let mut total = 0.0;
    for (v, delta) in views.deltas().iter().enumerate() {
        for j in 0..d.ncols() {
            for i in 0..d.nrows() {
                total += views.weight(v, i, j) * (delta[(i, j)] - d[(i, j)]).abs();
            }
        }
    }
    Ok(total)
}

/// `f = Σ_v Σ_ij W_ij^(v)·exp(-λ|Δ_ij^(v) - D_ij|^α)` with `λ = 1/(√2σ)^α`,
/// which is `exp(-(Δ - D)²/(2σ²))` for `α = 2`.
pub fn f_objective(
    views: &DissimilarityViews,
    d: &DMatrix<f64>,
    sigma: KernelSize,
    alpha: f64,
) -> Result<f64> {
    check_d(views, d)?;
    let kernel = GgdParams::with_kernel_size(alpha, sigma)?;
    let lambda = kernel.lambda();
    let mut total = 0.0;
    for (v, delta) in views.deltas().iter().enumerate() {
        for j in 0..d.ncols() {
            for i in 0..d.nrows() {
                let e = delta[(i, j)] - d[(i, j)];
                total += views.weight(v, i, j) * (-lambda * abs_pow(e, alpha)).exp();
            }
        }
    }
    Ok(total)
}

/// Warm start: classical scaling of the averaged views.
pub fn initial_gram(views: &DissimilarityViews) -> Result<DMatrix<f64>> {
    psd_project(&double_center(&views.mean()))
}

/// Projected (sub)gradient iterations from [`initial_gram`].
///
/// Each iteration takes `B ← B + η·∂f/∂B` (correntropy) or
/// `B ← B - η·g₀(B)` (L1), projects onto the PSD cone, and records the
/// objective at the projected iterate. Runs exactly `max_iter` iterations.
pub fn ree_fit(
    views: &DissimilarityViews,
    cfg: &EmbedConfig,
    loss: ReeLoss,
) -> Result<EmbeddingResult> {
    ree_fit_observed(views, cfg, loss, |_, _| {})
}

/// [`ree_fit`] calling `observer(iteration, B)` after every projection.
pub fn ree_fit_observed(
    views: &DissimilarityViews,
    cfg: &EmbedConfig,
    loss: ReeLoss,
    mut observer: impl FnMut(usize, &DMatrix<f64>),
) -> Result<EmbeddingResult> {
    cfg.validate(views.n_points())?;
    let sigma = match loss {
        ReeLoss::Correntropy => Some(cfg.resolve_sigma(views)?),
        ReeLoss::L1 => None,
    };
    let mut b = initial_gram(views)?;
    let mut d = gram_to_sq_dists(&b);
    let mut trace = SolverTrace::new();
    for it in 1..=cfg.max_iter {
        let eta = cfg.schedule.step(cfg.step, it);
        let step = match sigma {
            Some(s) => cmvree_gradient(views, &d, s, cfg.alpha)? * eta,
            None => mvree_subgradient(views, &d)? * -eta,
        };
        b = psd_project(&(b + step))?;
        observer(it, &b);
        d = gram_to_sq_dists(&b);
        let value = match sigma {
            Some(s) => f_objective(views, &d, s, cfg.alpha)?,
            None => f0_objective(views, &d)?,
        };
        if !value.is_finite() {
            return Err(Error::Numerical(format!(
                "embedding objective became non-finite at iteration {it}"
            )));
        }
        trace.objective.push(value);
    }
    Ok(EmbeddingResult::from_gram(b, cfg.target_dim, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pair_views(delta12: f64) -> DissimilarityViews {
        let d = DMatrix::from_row_slice(2, 2, &[0.0, delta12, delta12, 0.0]);
        DissimilarityViews::new(vec![d], None).unwrap()
    }

    #[test]
    fn subgradient_hand_example() {
        let views = pair_views(1.0);
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]);
        let g = mvree_subgradient(&views, &d).unwrap();
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        assert_eq!(f0_objective(&views, &d).unwrap(), 2.0);
    }

    #[test]
    fn zero_residual_gives_zero_gradients() {
        let views = pair_views(3.0);
        let d = views.deltas()[0].clone();
        assert_eq!(mvree_subgradient(&views, &d).unwrap(), DMatrix::zeros(2, 2));
        let s = KernelSize::new(1.0).unwrap();
        assert_eq!(cmvree_gradient(&views, &d, s, 2.0).unwrap(), DMatrix::zeros(2, 2));
        assert_eq!(f0_objective(&views, &d).unwrap(), 0.0);
        assert_eq!(f_objective(&views, &d, s, 2.0).unwrap(), 4.0);
    }

    #[test]
    fn doubling_weights_doubles_subgradient() {
        let d0 = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 4.0, 2.0, 4.0, 0.0]);
        let views = DissimilarityViews::new(vec![d0.clone()], None).unwrap();
        let heavy = views.clone().with_weights(vec![DMatrix::from_element(3, 3, 2.0)]).unwrap();
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 2.0, 0.0, 4.5, 1.0, 4.5, 0.0]);
        let g1 = mvree_subgradient(&views, &d).unwrap();
        let g2 = mvree_subgradient(&heavy, &d).unwrap();
        assert_eq!(g2, g1 * 2.0);
    }

    #[test]
    fn correntropy_gradient_closed_form_alpha_two() {
        let views = pair_views(1.0);
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]);
        let s = KernelSize::new(0.8).unwrap();
        let g = cmvree_gradient(&views, &d, s, 2.0).unwrap();
        let expected = (-1.0 / (2.0 * 0.64f64)).exp() * (2.0 - 1.0) / 0.64;
        assert!((g[(0, 1)] - expected).abs() < 1e-15);
        assert!((g[(0, 0)] + expected).abs() < 1e-15);
    }

    #[test]
    fn correntropy_decreases_away_from_views() {
        let views = pair_views(2.0);
        let s = KernelSize::new(1.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let x = 2.0 + k as f64 * 0.3;
            let d = DMatrix::from_row_slice(2, 2, &[0.0, x, x, 0.0]);
            let f = f_objective(&views, &d, s, 2.0).unwrap();
            assert!(f < prev || k == 0);
            prev = f;
        }
    }

    #[test]
    fn shape_mismatch() {
        let views = pair_views(1.0);
        assert!(f0_objective(&views, &DMatrix::zeros(3, 3)).is_err());
    }
}
