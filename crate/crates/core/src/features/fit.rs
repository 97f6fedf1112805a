//! Double-loop drivers.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::cemv::{cemv_objective, cemv_update_a, cemv_update_w, cemv_update_x};
use super::cmv::{
    cauchymv_objective, cauchymv_update_a, cmv_objective, cmv_update_a, cmv_update_w,
    cmv_update_x, l2mv_objective,
};
use super::{AuxWeights, CmvConfig, IntactSpaceModel, MultiViewFeatureSet};
use crate::error::{Error, Result};
use crate::loss::CauchyScale;
use crate::trace::{SolverTrace, StopReason};

/// Seeded starting point shared by every solver.
///
/// One `max(d_v) × d` standard normal matrix is drawn and each `W_v` takes
/// its first `d_v` rows, scaled by `1/√d`; views with equal dimension thus
/// start from the same map. `X` is the squared-error latent update for
/// those maps.
pub fn initialize(
    fs: &MultiViewFeatureSet,
    cfg: &CmvConfig,
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    cfg.validate(fs)?;
    let d = cfg.latent_dim;
    let rows = fs.view_dims().into_iter().max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = 1.0 / (d as f64).sqrt();
    let common = DMatrix::<f64>::from_fn(rows, d, |_, _| {
        let g: f64 = StandardNormal.sample(&mut rng);
        g * scale
    });
    let w: Vec<DMatrix<f64>> = fs
        .view_dims()
        .into_iter()
        .map(|dv| common.rows(0, dv).into_owned())
        .collect();
    let ones = DMatrix::from_element(fs.n_views(), fs.n_instances(), -1.0);
    let x = cmv_update_x(fs, &w, &ones, cfg.c2)?;
    Ok((x, w))
}

/// Records `value`, returns true once the relative change is below tolerance.
fn record(trace: &mut SolverTrace, value: f64, rel_tol: f64) -> Result<bool> {
    if !value.is_finite() {
        return Err(Error::Numerical(format!(
            "objective became non-finite at outer iteration {}",
            trace.iterations() + 1
        )));
    }
    let done = match trace.last() {
        Some(prev) => (value - prev).abs() <= rel_tol * prev.abs().max(f64::MIN_POSITIVE),
        None => false,
    };
    trace.objective.push(value);
    if done {
        trace.stop = StopReason::RelativeTolerance;
    }
    Ok(done)
}

#[derive(Clone, Copy)]
enum InstanceRule {
    Correntropy,
    Squared,
    Cauchy,
}

fn fit_per_instance(
    fs: &MultiViewFeatureSet,
    cfg: &CmvConfig,
    rule: InstanceRule,
) -> Result<IntactSpaceModel> {
    let (mut x, mut w) = initialize(fs, cfg)?;
    let cauchy = CauchyScale::new(cfg.sigma.get())?;
    let mut trace = SolverTrace::new();
    let mut a = DMatrix::from_element(fs.n_views(), fs.n_instances(), -1.0);
    for _ in 0..cfg.max_outer {
        match rule {
            InstanceRule::Correntropy => a = cmv_update_a(fs, &x, &w, cfg.sigma)?,
            InstanceRule::Cauchy => a = cauchymv_update_a(fs, &x, &w, cauchy)?,
            InstanceRule::Squared => {}
        }
        for _ in 0..cfg.max_inner {
            x = cmv_update_x(fs, &w, &a, cfg.c2)?;
            w = cmv_update_w(fs, &x, &a, cfg.c1)?;
        }
        let value = match rule {
            InstanceRule::Correntropy => cmv_objective(fs, &x, &w, &a, cfg.sigma, cfg.c1, cfg.c2)?,
            InstanceRule::Cauchy => cauchymv_objective(fs, &x, &w, cauchy, cfg.c1, cfg.c2)?,
            InstanceRule::Squared => l2mv_objective(fs, &x, &w, cfg.c1, cfg.c2)?,
        };
        if record(&mut trace, value, cfg.rel_tol)? {
            break;
        }
    }
    Ok(IntactSpaceModel {
        x,
        w,
        weights: AuxWeights::PerInstance(a),
        trace,
    })
}

/// Correntropy multi-view learning with one weight per instance and view.
///
/// Outer loop: refresh `a_i^(v)`. Inner loop: `max_inner` rounds of latent
/// then map updates. The trace holds `R3` after every outer iteration and is
/// non-decreasing.
pub fn cmv_fit(fs: &MultiViewFeatureSet, cfg: &CmvConfig) -> Result<IntactSpaceModel> {
    fit_per_instance(fs, cfg, InstanceRule::Correntropy)
}

/// Squared-error baseline: the same alternation with every weight frozen at `-1`.
pub fn l2mv_fit(fs: &MultiViewFeatureSet, cfg: &CmvConfig) -> Result<IntactSpaceModel> {
    fit_per_instance(fs, cfg, InstanceRule::Squared)
}

/// Cauchy-loss baseline solved by iterative reweighting; `cfg.sigma` is the
/// Cauchy scale `c`. The trace is the negated Cauchy objective.
pub fn cauchymv_fit(fs: &MultiViewFeatureSet, cfg: &CmvConfig) -> Result<IntactSpaceModel> {
    fit_per_instance(fs, cfg, InstanceRule::Cauchy)
}

/// Entrywise correntropy multi-view learning.
pub fn cemv_fit(fs: &MultiViewFeatureSet, cfg: &CmvConfig) -> Result<IntactSpaceModel> {
    let (mut x, mut w) = initialize(fs, cfg)?;
    let sigmas = cfg.view_kernel_sizes(&fs.view_dims());
    let mut trace = SolverTrace::new();
    let mut a: Vec<DMatrix<f64>> = Vec::new();
    for _ in 0..cfg.max_outer {
        a = cemv_update_a(fs, &x, &w, &sigmas)?;
        for _ in 0..cfg.max_inner {
            x = cemv_update_x(fs, &w, &a, cfg.c2)?;
            w = cemv_update_w(fs, &x, &a, cfg.c1)?;
        }
        let value = cemv_objective(fs, &x, &w, &a, cfg.sigma, &sigmas, cfg.c1, cfg.c2)?;
        if record(&mut trace, value, cfg.rel_tol)? {
            break;
        }
    }
    Ok(IntactSpaceModel {
        x,
        w,
        weights: AuxWeights::PerEntry(a),
        trace,
    })
}
