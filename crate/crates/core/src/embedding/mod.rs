//! Euclidean embedding of several dissimilarity views.
//!
//! Every view `Δ^(v)` holds *squared* dissimilarities. The solvers search a
//! positive semidefinite Gram matrix `B` whose induced squared distances `D`
//! agree with the views, then return the configuration `X = U·Λ^{1/2}`.

mod gram;
mod ree;

pub use gram::{b_to_d, double_center, psd_project, GramState};
pub use ree::{
    cmvree_gradient, f0_objective, f_objective, initial_gram, mvree_subgradient, ree_fit,
    ree_fit_observed, ReeLoss,
};

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{ensure_square, max_asymmetry, median, SortedEigen};
use crate::loss::KernelSize;
use crate::trace::SolverTrace;

/// `M` symmetric, zero-diagonal, non-negative `N × N` matrices plus optional
/// per-entry weights (all ones when absent).
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityViews {
    deltas: Vec<DMatrix<f64>>,
    weights: Option<Vec<DMatrix<f64>>>,
}

/// How much [`DissimilarityViews::sanitize`] had to change its input.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Correction {
    /// Largest `|Δ_ij - Δ_ji|` seen before symmetrizing.
    pub max_asymmetry: f64,
    /// Diagonal entries that were not zero.
    pub nonzero_diagonal: usize,
    /// Entries below zero that were clamped.
    pub negatives_clamped: usize,
    /// Most negative value clamped (0 if none).
    pub min_value: f64,
}

impl Correction {
    pub fn is_clean(&self) -> bool {
        self.max_asymmetry == 0.0 && self.nonzero_diagonal == 0 && self.negatives_clamped == 0
    }

    fn merge(&mut self, other: &Correction) {
        self.max_asymmetry = self.max_asymmetry.max(other.max_asymmetry);
        self.nonzero_diagonal += other.nonzero_diagonal;
        self.negatives_clamped += other.negatives_clamped;
        self.min_value = self.min_value.min(other.min_value);
    }
}

impl DissimilarityViews {
    /// Validates already clean views: exactly symmetric, zero diagonal,
    /// finite and non-negative entries, equal sizes.
    pub fn new(deltas: Vec<DMatrix<f64>>, weights: Option<Vec<DMatrix<f64>>>) -> Result<Self> {
        let n = check_sizes(&deltas)?;
        for (v, d) in deltas.iter().enumerate() {
            let asym = max_asymmetry(d);
            if asym != 0.0 {
                return Err(Error::NotSymmetric(asym));
            }
            if (0..n).any(|i| d[(i, i)] != 0.0) {
                return Err(Error::Degenerate(format!("view {v} has a nonzero diagonal")));
            }
            if d.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::Degenerate(format!(
                    "view {v} has negative or non-finite entries"
                )));
            }
        }
        if let Some(w) = &weights {
            if w.len() != deltas.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} weight matrices for {} views",
                    w.len(),
                    deltas.len()
                )));
            }
            for wv in w {
                if wv.shape() != (n, n) {
                    return Err(Error::DimensionMismatch(format!(
                        "weight matrix {:?}, views are {n}x{n}",
                        wv.shape()
                    )));
                }
                if wv.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                    return Err(Error::Degenerate("weights must be non-negative".into()));
                }
            }
        }
        Ok(DissimilarityViews { deltas, weights })
    }

    /// Repairs raw matrices: `(Δ + Δᵀ)/2`, zero diagonal, negatives clamped
    /// to zero. Non-square or mismatched input is still an error.
    pub fn sanitize(raw: Vec<DMatrix<f64>>) -> Result<(Self, Correction)> {
        check_sizes(&raw)?;
        let mut total = Correction::default();
        let mut deltas = Vec::with_capacity(raw.len());
        for (v, d) in raw.into_iter().enumerate() {
            if d.iter().any(|x| !x.is_finite()) {
                return Err(Error::Degenerate(format!("view {v} has non-finite entries")));
            }
            let (clean, c) = sanitize_one(&d);
            total.merge(&c);
            deltas.push(clean);
        }
        Ok((DissimilarityViews::new(deltas, None)?, total))
    }

    pub fn with_weights(self, weights: Vec<DMatrix<f64>>) -> Result<Self> {
        DissimilarityViews::new(self.deltas, Some(weights))
    }

    pub fn deltas(&self) -> &[DMatrix<f64>] {
        &self.deltas
    }

    pub fn n_views(&self) -> usize {
        self.deltas.len()
    }

    pub fn n_points(&self) -> usize {
        self.deltas[0].nrows()
    }

    /// Weight `W_ij^(v)`.
    #[inline]
    pub fn weight(&self, v: usize, i: usize, j: usize) -> f64 {
        match &self.weights {
            Some(w) => w[v][(i, j)],
            None => 1.0,
        }
    }

    /// Sum of every weight; an upper bound of the correntropy objective.
    pub fn total_weight(&self) -> f64 {
        match &self.weights {
            Some(w) => w.iter().map(|m| m.sum()).sum(),
            None => (self.n_views() * self.n_points() * self.n_points()) as f64,
        }
    }

    /// Only view `v`, keeping its weights.
    pub fn single(&self, v: usize) -> DissimilarityViews {
        DissimilarityViews {
            deltas: alloc::vec![self.deltas[v].clone()],
            weights: self.weights.as_ref().map(|w| alloc::vec![w[v].clone()]),
        }
    }

    /// Entrywise mean of the views.
    pub fn mean(&self) -> DMatrix<f64> {
        let mut acc = self.deltas[0].clone();
        for d in &self.deltas[1..] {
            acc += d;
        }
        acc / self.n_views() as f64
    }

    /// Conjugates every view by a permutation: entry `(i, j)` of the result
    /// is entry `(perm[i], perm[j])` of the input.
    pub fn permuted(&self, perm: &[usize]) -> DissimilarityViews {
        let p = |m: &DMatrix<f64>| {
            DMatrix::from_fn(perm.len(), perm.len(), |i, j| m[(perm[i], perm[j])])
        };
        DissimilarityViews {
            deltas: self.deltas.iter().map(p).collect(),
            weights: self.weights.as_ref().map(|w| w.iter().map(p).collect()),
        }
    }

    /// Median of the pooled off-diagonal entries of all views.
    pub fn median_offdiag(&self) -> f64 {
        let n = self.n_points();
        let mut pooled = Vec::with_capacity(self.n_views() * n * n.saturating_sub(1));
        for d in &self.deltas {
            for j in 0..n {
                for i in 0..n {
                    if i != j {
                        pooled.push(d[(i, j)]);
                    }
                }
            }
        }
        median(&mut pooled).unwrap_or(0.0)
    }
}

fn check_sizes(deltas: &[DMatrix<f64>]) -> Result<usize> {
    let first = deltas
        .first()
        .ok_or_else(|| Error::Degenerate("at least one dissimilarity view is required".into()))?;
    ensure_square(first, "dissimilarity matrix")?;
    let n = first.nrows();
    if n == 0 {
        return Err(Error::Degenerate("dissimilarity matrices are empty".into()));
    }
    for (v, d) in deltas.iter().enumerate() {
        ensure_square(d, "dissimilarity matrix")?;
        if d.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "view {v} is {}x{}, view 0 is {n}x{n}",
                d.nrows(),
                d.ncols()
            )));
        }
    }
    Ok(n)
}

fn sanitize_one(d: &DMatrix<f64>) -> (DMatrix<f64>, Correction) {
    let n = d.nrows();
    let mut c = Correction {
        max_asymmetry: max_asymmetry(d),
        ..Correction::default()
    };
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        if d[(j, j)] != 0.0 {
            c.nonzero_diagonal += 1;
        }
        for i in (j + 1)..n {
            let mut v = 0.5 * (d[(i, j)] + d[(j, i)]);
            if v < 0.0 {
                c.negatives_clamped += 2;
                c.min_value = c.min_value.min(v);
                v = 0.0;
            }
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    (out, c)
}

/// Step-size rule of the embedding solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepSchedule {
    /// `η` at every iteration.
    Fixed,
    /// `η₀/√i` at iteration `i` (1-based).
    InverseSqrt,
}

impl StepSchedule {
    pub fn step(self, base: f64, iteration: usize) -> f64 {
        match self {
            StepSchedule::Fixed => base,
            StepSchedule::InverseSqrt => base / (iteration as f64).sqrt(),
        }
    }
}

/// Kernel sizes used for the published experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelProfile {
    PointSet,
    ShapeRetrieval,
    Lidar,
    Fish,
}

impl KernelProfile {
    pub fn sigma(self) -> KernelSize {
        let s = match self {
            KernelProfile::PointSet => 3.0,
            KernelProfile::ShapeRetrieval => 1.5,
            KernelProfile::Lidar => 2.0,
            KernelProfile::Fish => 1.0,
        };
        KernelSize::new(s).expect("preset kernel sizes are positive")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedConfig {
    /// Kernel size for the correntropy objective; `None` uses the median of
    /// the pooled off-diagonal dissimilarities.
    pub sigma: Option<KernelSize>,
    /// Shape exponent of the generalized correntropy (2 = Gaussian).
    pub alpha: f64,
    /// `η` (fixed) or `η₀` (inverse square root).
    pub step: f64,
    pub schedule: StepSchedule,
    pub max_iter: usize,
    /// Number of leading coordinates kept in [`EmbeddingResult::x_k`].
    pub target_dim: usize,
    /// Recorded for reproducibility; the solvers themselves are deterministic.
    pub seed: u64,
}

impl EmbedConfig {
    /// Gradient ascent on the correntropy objective with a fixed step.
    pub fn correntropy(step: f64, target_dim: usize) -> Self {
        EmbedConfig {
            sigma: None,
            alpha: 2.0,
            step,
            schedule: StepSchedule::Fixed,
            max_iter: 500,
            target_dim,
            seed: 0,
        }
    }

    /// Subgradient descent on the L1 objective with `η₀/√i` steps.
    pub fn l1(step0: f64, target_dim: usize) -> Self {
        EmbedConfig {
            schedule: StepSchedule::InverseSqrt,
            ..EmbedConfig::correntropy(step0, target_dim)
        }
    }

    pub fn validate(&self, n_points: usize) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::param("step", "must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::param("alpha", "must be positive"));
        }
        if self.target_dim == 0 || self.target_dim > n_points {
            return Err(Error::param(
                "target_dim",
                format!("must lie in 1..={n_points}, got {}", self.target_dim),
            ));
        }
        Ok(())
    }

    /// The kernel size actually used on `views`.
    pub fn resolve_sigma(&self, views: &DissimilarityViews) -> Result<KernelSize> {
        match self.sigma {
            Some(s) => Ok(s),
            None => KernelSize::new(views.median_offdiag()).map_err(|_| {
                Error::Degenerate("median dissimilarity is zero; set sigma explicitly".into())
            }),
        }
    }
}

/// Configuration recovered from a Gram matrix.
#[derive(Debug, Clone)]
pub struct EmbeddingResult {
    /// `N × N` matrix `U·Λ₊^{1/2}`, columns ordered by descending eigenvalue.
    pub x_full: DMatrix<f64>,
    /// Eigenvalues of the final Gram matrix, descending, clipped at zero.
    pub eigenvalues: DVector<f64>,
    /// Final Gram matrix.
    pub gram: DMatrix<f64>,
    pub target_dim: usize,
    /// Objective after every iteration (empty for classical scaling).
    pub trace: SolverTrace,
}

impl EmbeddingResult {
    pub(crate) fn from_gram(gram: DMatrix<f64>, target_dim: usize, trace: SolverTrace) -> Self {
        let eig = SortedEigen::new(&gram);
        let eigenvalues = eig.values.map(|l| l.max(0.0));
        let mut x_full = eig.vectors;
        for (k, mut col) in x_full.column_iter_mut().enumerate() {
            col *= eigenvalues[k].sqrt();
        }
        EmbeddingResult {
            x_full,
            eigenvalues,
            gram,
            target_dim,
            trace,
        }
    }

    /// The leading `target_dim` coordinates.
    pub fn x_k(&self) -> DMatrix<f64> {
        self.x_full.columns(0, self.target_dim).into_owned()
    }
}

/// First `k` columns of the configuration, i.e. the coordinates along the
/// `k` dominant eigenvalues.
pub fn extract_configuration(result: &EmbeddingResult, k: usize) -> Result<DMatrix<f64>> {
    let n = result.x_full.ncols();
    if k == 0 || k > n {
        return Err(Error::param("k", format!("must lie in 1..={n}, got {k}")));
    }
    Ok(result.x_full.columns(0, k).into_owned())
}

/// Classical scaling: double-center, eigendecompose, clip negative eigenvalues.
pub fn cmds(delta: &DMatrix<f64>, k: usize) -> Result<EmbeddingResult> {
    ensure_square(delta, "dissimilarity matrix")?;
    let n = delta.nrows();
    if k == 0 || k > n {
        return Err(Error::param("k", format!("must lie in 1..={n}, got {k}")));
    }
    let b = gram::psd_project(&double_center(delta))?;
    Ok(EmbeddingResult::from_gram(b, k, SolverTrace::new()))
}

/// Entrywise `√(Δa_ij·Δb_ij)`.
pub fn hadamard_combine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "cannot combine {:?} with {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.zip_map(b, |x, y| (x * y).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn sanitize_reports_corrections() {
        let raw = DMatrix::from_row_slice(3, 3, &[0.5, 1.0, -0.1, 3.0, 0.0, 2.0, -0.1, 2.0, 0.0]);
        let (views, c) = DissimilarityViews::sanitize(vec![raw]).unwrap();
        let d = &views.deltas()[0];
        assert_eq!(d[(0, 1)], 2.0);
        assert_eq!(d[(0, 2)], 0.0);
        assert_eq!(d[(0, 0)], 0.0);
        assert_eq!(c.max_asymmetry, 2.0);
        assert_eq!(c.nonzero_diagonal, 1);
        assert_eq!(c.negatives_clamped, 2);
        assert!(!c.is_clean());
    }

    #[test]
    fn sanitize_clean_input_reports_nothing() {
        let raw = DMatrix::from_row_slice(2, 2, &[0.0, 4.0, 4.0, 0.0]);
        let (views, c) = DissimilarityViews::sanitize(vec![raw.clone()]).unwrap();
        assert!(c.is_clean());
        assert_eq!(views.deltas()[0], raw);
    }

    #[test]
    fn asymmetric_input_averaged() {
        let raw = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 3.0, 0.0]);
        let (views, _) = DissimilarityViews::sanitize(vec![raw.clone()]).unwrap();
        assert_eq!(views.deltas()[0], (&raw + raw.transpose()) / 2.0);
    }

    #[test]
    fn invalid_views_rejected() {
        assert!(DissimilarityViews::sanitize(vec![DMatrix::zeros(2, 3)]).is_err());
        assert!(DissimilarityViews::new(vec![DMatrix::zeros(2, 2), DMatrix::zeros(3, 3)], None).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(DissimilarityViews::new(vec![neg], None).is_err());
    }

    #[test]
    fn hadamard_values() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 4.0, 4.0, 0.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 9.0, 9.0, 0.0]);
        assert_eq!(hadamard_combine(&a, &b).unwrap()[(0, 1)], 6.0);
        assert_eq!(hadamard_combine(&a, &a).unwrap(), a);
        assert!(hadamard_combine(&a, &DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn cmds_single_point() {
        let r = cmds(&DMatrix::zeros(1, 1), 1).unwrap();
        assert_eq!(r.x_k(), DMatrix::zeros(1, 1));
    }

    #[test]
    fn cmds_full_dimension_returns_everything() {
        let delta = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 4.0, 1.0, 0.0, 1.0, 4.0, 1.0, 0.0]);
        let r = cmds(&delta, 3).unwrap();
        assert_eq!(r.x_k(), r.x_full);
        assert_eq!(extract_configuration(&r, 3).unwrap(), r.x_full);
        assert!(extract_configuration(&r, 0).is_err());
        assert!(extract_configuration(&r, 4).is_err());
        assert!(cmds(&delta, 4).is_err());
    }

    #[test]
    fn inverse_sqrt_schedule() {
        assert_eq!(StepSchedule::InverseSqrt.step(0.05, 4), 0.025);
        assert_eq!(StepSchedule::Fixed.step(0.1, 9), 0.1);
    }

    #[test]
    fn median_kernel_default() {
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 5.0, 1.0, 0.0, 9.0, 5.0, 9.0, 0.0]);
        let views = DissimilarityViews::new(vec![d], None).unwrap();
        let cfg = EmbedConfig::correntropy(0.1, 2);
        assert_eq!(cfg.resolve_sigma(&views).unwrap().get(), 5.0);
    }
}
