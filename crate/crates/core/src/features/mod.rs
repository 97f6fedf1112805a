//! Multi-view learning on feature matrices.
//!
//! Every view `v` is a `d_v × N` matrix whose column `i` is the feature
//! vector of instance `i`. The solvers learn a `d × N` latent matrix `X` and
//! per-view maps `W_v` (`d_v × d`) so that `z_i^(v) ≈ W_v·x_i`.
//!
//! All solvers share one alternation: refresh the auxiliary weights, then
//! alternate exact ridge updates of `X` and `W`. The weights are stored with
//! the half-quadratic sign convention (negative, `-1` meaning full trust).
//! Internally the ridge systems are solved in the positive-weight form
//! `min Σ p‖z - Wx‖² + c‖·‖²` with `p = -a`.
//!
//! `c1`/`c2` are the ridge penalties of that positive-weight form. The
//! correntropy objectives traced by the solvers therefore carry them divided
//! by `2σ²`.

mod cemv;
mod cmv;
mod fit;

pub use cemv::{cemv_objective, cemv_update_a, cemv_update_w, cemv_update_x};
pub use cmv::{
    cauchymv_objective, cauchymv_update_a, cmv_objective, cmv_update_a, cmv_update_w,
    cmv_update_x, l2mv_objective,
};
pub use fit::{cauchymv_fit, cemv_fit, cmv_fit, initialize, l2mv_fit};

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::loss::KernelSize;
use crate::trace::SolverTrace;

/// `M` feature views over the same `N` instances.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewFeatureSet {
    views: Vec<DMatrix<f64>>,
}

impl MultiViewFeatureSet {
    pub fn new(views: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = views
            .first()
            .ok_or_else(|| Error::Degenerate("at least one view is required".into()))?;
        let n = first.ncols();
        if n == 0 {
            return Err(Error::Degenerate("views have no instances".into()));
        }
        for (v, view) in views.iter().enumerate() {
            if view.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "view {v} has {} instances, view 0 has {n}",
                    view.ncols()
                )));
            }
            if view.nrows() == 0 {
                return Err(Error::Degenerate(format!("view {v} has no feature rows")));
            }
            if view.iter().any(|x| !x.is_finite()) {
                return Err(Error::Degenerate(format!("view {v} contains non-finite values")));
            }
        }
        Ok(MultiViewFeatureSet { views })
    }

    pub fn views(&self) -> &[DMatrix<f64>] {
        &self.views
    }

    pub fn view(&self, v: usize) -> &DMatrix<f64> {
        &self.views[v]
    }

    pub fn into_views(self) -> Vec<DMatrix<f64>> {
        self.views
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn n_instances(&self) -> usize {
        self.views[0].ncols()
    }

    pub fn view_dims(&self) -> Vec<usize> {
        self.views.iter().map(|v| v.nrows()).collect()
    }

    /// Divides each view by its mean squared column norm `Σ_i ‖z_i‖² / N`.
    ///
    /// Not idempotent in general: a second call rescales again unless the
    /// mean squared norm already equals one.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.n_instances() as f64;
        let views = self
            .views
            .iter()
            .enumerate()
            .map(|(v, z)| {
                let scale = z.norm_squared() / n;
                if scale == 0.0 {
                    Err(Error::Degenerate(format!("view {v} is identically zero")))
                } else {
                    Ok(z / scale)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiViewFeatureSet { views })
    }

    /// Reorders instances: column `i` of the result is column `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let views = self
            .views
            .iter()
            .map(|z| DMatrix::from_fn(z.nrows(), perm.len(), |r, c| z[(r, perm[c])]))
            .collect();
        MultiViewFeatureSet { views }
    }

    /// Stacks all views into one tall view.
    pub fn concatenated(&self) -> DMatrix<f64> {
        let rows: usize = self.views.iter().map(|z| z.nrows()).sum();
        let mut out = DMatrix::zeros(rows, self.n_instances());
        let mut r0 = 0;
        for z in &self.views {
            out.view_mut((r0, 0), (z.nrows(), z.ncols())).copy_from(z);
            r0 += z.nrows();
        }
        out
    }

    /// A two-view set made of two copies of `z`. Feeding a single feature
    /// set through the multi-view solver this way turns it into a
    /// dimension-reduction baseline.
    pub fn duplicated(z: DMatrix<f64>) -> Result<Self> {
        MultiViewFeatureSet::new(alloc::vec![z.clone(), z])
    }
}

/// Configuration shared by the feature-view solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct CmvConfig {
    /// Dimension `d` of the latent space.
    pub latent_dim: usize,
    /// Kernel size `σ` (the Cauchy scale `c` for the Cauchy baseline).
    pub sigma: KernelSize,
    /// Ridge penalty on every `W_v`.
    pub c1: f64,
    /// Ridge penalty on every `x_i`.
    pub c2: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Stop once `|R_k - R_{k-1}| ≤ rel_tol·|R_{k-1}|`.
    pub rel_tol: f64,
    pub seed: u64,
    /// Per-view kernel sizes for the entrywise solver. Defaults to `σ/√d_v`.
    pub view_sigmas: Option<Vec<f64>>,
}

impl CmvConfig {
    pub fn new(latent_dim: usize, sigma: f64) -> Result<Self> {
        Ok(CmvConfig {
            latent_dim,
            sigma: KernelSize::new(sigma)?,
            c1: 1e-2,
            c2: 1e-2,
            max_outer: 50,
            max_inner: 5,
            rel_tol: 1e-6,
            seed: 0,
            view_sigmas: None,
        })
    }

    pub fn validate(&self, fs: &MultiViewFeatureSet) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(Error::param("latent_dim", "must be at least 1"));
        }
        if self.latent_dim >= fs.n_instances() {
            return Err(Error::param(
                "latent_dim",
                format!(
                    "must be below the instance count {} (got {})",
                    fs.n_instances(),
                    self.latent_dim
                ),
            ));
        }
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(Error::param("c1", "must be positive"));
        }
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return Err(Error::param("c2", "must be positive"));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::param("max_outer/max_inner", "must be at least 1"));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::param("rel_tol", "must be non-negative"));
        }
        if let Some(s) = &self.view_sigmas {
            if s.len() != fs.n_views() {
                return Err(Error::param(
                    "view_sigmas",
                    format!("expected {} entries, got {}", fs.n_views(), s.len()),
                ));
            }
            for &x in s {
                KernelSize::new(x)?;
            }
        }
        Ok(())
    }

    /// Kernel sizes `σ_v` used by the entrywise solver.
    pub fn view_kernel_sizes(&self, view_dims: &[usize]) -> Vec<KernelSize> {
        match &self.view_sigmas {
            Some(s) => s.iter().map(|&x| KernelSize(x)).collect(),
            None => view_dims
                .iter()
                .map(|&d| KernelSize(self.sigma.get() / (d as f64).sqrt()))
                .collect(),
        }
    }
}

/// Auxiliary half-quadratic weights, all in `[-1, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub enum AuxWeights {
    /// `a_i^(v)`, stored as an `M × N` matrix.
    PerInstance(DMatrix<f64>),
    /// `a_ij^(v)`, one `d_v × N` matrix per view.
    PerEntry(Vec<DMatrix<f64>>),
}

impl AuxWeights {
    /// Mean weight of view `v` for each instance (averaged over entries for
    /// the entrywise form).
    pub fn instance_means(&self, v: usize) -> Vec<f64> {
        match self {
            AuxWeights::PerInstance(a) => a.row(v).iter().copied().collect(),
            AuxWeights::PerEntry(a) => a[v].column_iter().map(|c| c.mean()).collect(),
        }
    }

    /// Mean weight of each feature row of view `v` across instances; only
    /// defined for the entrywise form.
    pub fn entry_means(&self, v: usize) -> Option<Vec<f64>> {
        match self {
            AuxWeights::PerInstance(_) => None,
            AuxWeights::PerEntry(a) => Some(a[v].row_iter().map(|r| r.mean()).collect()),
        }
    }

    pub fn range(&self) -> (f64, f64) {
        let it: alloc::boxed::Box<dyn Iterator<Item = f64> + '_> = match self {
            AuxWeights::PerInstance(a) => alloc::boxed::Box::new(a.iter().copied()),
            AuxWeights::PerEntry(a) => {
                alloc::boxed::Box::new(a.iter().flat_map(|m| m.iter().copied()))
            }
        };
        it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        })
    }
}

/// Result of a feature-view fit.
#[derive(Debug, Clone)]
pub struct IntactSpaceModel {
    /// `d × N` latent representation; column `i` is `x_i`.
    pub x: DMatrix<f64>,
    /// `d_v × d` map of every view.
    pub w: Vec<DMatrix<f64>>,
    /// Weights of the final outer iteration.
    pub weights: AuxWeights,
    pub trace: SolverTrace,
}

impl IntactSpaceModel {
    /// Mean squared reconstruction residual per instance, for each view.
    pub fn mean_residual(&self, fs: &MultiViewFeatureSet) -> Vec<f64> {
        fs.views()
            .iter()
            .zip(&self.w)
            .map(|(z, w)| (z - w * &self.x).norm_squared() / z.ncols() as f64)
            .collect()
    }
}

/// Squared residual `‖z_i - W x_i‖²` for every instance of one view.
pub(crate) fn residuals_sq(z: &DMatrix<f64>, w: &DMatrix<f64>, x: &DMatrix<f64>) -> Vec<f64> {
    let r = z - w * x;
    r.column_iter().map(|c| c.norm_squared()).collect()
}

pub(crate) fn check_shapes(
    fs: &MultiViewFeatureSet,
    x: Option<&DMatrix<f64>>,
    w: Option<&[DMatrix<f64>]>,
) -> Result<()> {
    let n = fs.n_instances();
    if let Some(x) = x {
        if x.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "X has {} columns, expected {n}",
                x.ncols()
            )));
        }
    }
    if let Some(w) = w {
        if w.len() != fs.n_views() {
            return Err(Error::DimensionMismatch(format!(
                "{} maps for {} views",
                w.len(),
                fs.n_views()
            )));
        }
        for (v, (wv, z)) in w.iter().zip(fs.views()).enumerate() {
            if wv.nrows() != z.nrows() {
                return Err(Error::DimensionMismatch(format!(
                    "W_{v} has {} rows, view has {}",
                    wv.nrows(),
                    z.nrows()
                )));
            }
            if let Some(x) = x {
                if wv.ncols() != x.nrows() {
                    return Err(Error::DimensionMismatch(format!(
                        "W_{v} has {} columns, latent dimension is {}",
                        wv.ncols(),
                        x.nrows()
                    )));
                }
            }
        }
    }
    Ok(())
}
