//! Seeded synthetic data: planted linear models, salt-and-pepper corruption
//! of feature views, and noisy distance views.
//!
//! Every generator is a pure function of its parameters and seed.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::embedding::DissimilarityViews;
use crate::error::{Error, Result};
use crate::features::MultiViewFeatureSet;

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// A planted model `z^(v) = W*_v·X*` together with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedMultiView {
    pub features: MultiViewFeatureSet,
    pub w: Vec<DMatrix<f64>>,
    pub x: DMatrix<f64>,
}

/// Gaussian `W*_v` (`d_v × d`) and `X*` (`d × N`); requires `d < N` and
/// `d ≤ d_v` for every view.
pub fn gen_planted_multiview(
    n_instances: usize,
    latent_dim: usize,
    view_dims: &[usize],
    seed: u64,
) -> Result<PlantedMultiView> {
    if view_dims.is_empty() {
        return Err(Error::param("view_dims", "at least one view is required"));
    }
    if latent_dim == 0 || latent_dim >= n_instances {
        return Err(Error::param(
            "latent_dim",
            format!("must lie in 1..{n_instances} (got {latent_dim})"),
        ));
    }
    if let Some(&dv) = view_dims.iter().find(|&&dv| dv < latent_dim) {
        return Err(Error::param(
            "view_dims",
            format!("view dimension {dv} is below the latent dimension {latent_dim}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = gaussian_matrix(&mut rng, latent_dim, n_instances);
    let w: Vec<DMatrix<f64>> = view_dims
        .iter()
        .map(|&dv| gaussian_matrix(&mut rng, dv, latent_dim))
        .collect();
    let features = MultiViewFeatureSet::new(w.iter().map(|wv| wv * &x).collect())?;
    Ok(PlantedMultiView { features, w, x })
}

/// What a [`NoiseSpec`] corrupts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// Whole instances (columns) of one feature view.
    InstanceReplacement,
    /// A subset of the entries of every instance.
    PixelReplacement,
    /// All distances involving a subset of points.
    DistanceSaltPepper,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    Fraction(f64),
    Indices(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub selection: Selection,
    /// Multiplier on the salt and pepper levels for feature noise, absolute
    /// offset for distance noise.
    pub magnitude: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn fraction(kind: NoiseKind, fraction: f64, seed: u64) -> Self {
        NoiseSpec {
            kind,
            selection: Selection::Fraction(fraction),
            magnitude: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Selection::Fraction(f) = self.selection {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::param("fraction", format!("must lie in [0, 1] (got {f})")));
            }
        }
        if !(self.magnitude >= 0.0 && self.magnitude.is_finite()) {
            return Err(Error::param("magnitude", "must be finite and non-negative"));
        }
        Ok(())
    }

    /// Resolves the selection against `n` candidates, shuffling with `rng`
    /// for fractional selections. The result is sorted.
    fn pick(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
        let mut out = match &self.selection {
            Selection::Fraction(f) => {
                let k = (f * n as f64).round() as usize;
                let mut all: Vec<usize> = (0..n).collect();
                all.shuffle(rng);
                all.truncate(k.min(n));
                all
            }
            Selection::Indices(idx) => {
                if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
                    return Err(Error::param("indices", format!("{bad} is out of range for {n}")));
                }
                let mut idx = idx.clone();
                idx.dedup();
                idx
            }
        };
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// Which entries a corruption touched.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorruptionReport {
    /// Affected instances (or points).
    pub affected: Vec<usize>,
    /// Affected feature rows per instance, for pixel noise.
    pub rows: Vec<Vec<usize>>,
    /// Set when the request selected nothing.
    pub warning: Option<String>,
}

impl CorruptionReport {
    fn check_empty(mut self, what: &str) -> Self {
        let empty = self.affected.is_empty() || (!self.rows.is_empty() && self.rows.iter().all(Vec::is_empty));
        if empty {
            self.warning = Some(format!("no {what} selected for corruption"));
        }
        self
    }
}

/// Two-level salt-and-pepper source whose levels are the minimum and
/// maximum of a clean view and whose expected value is its mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaltPepper {
    pub pepper: f64,
    pub salt: f64,
    /// Probability of drawing `salt`.
    pub p_salt: f64,
}

impl SaltPepper {
    pub fn matching(z: &DMatrix<f64>) -> Self {
        let lo = z.min();
        let hi = z.max();
        let p_salt = if hi > lo { (z.mean() - lo) / (hi - lo) } else { 0.0 };
        SaltPepper {
            pepper: lo,
            salt: hi,
            p_salt,
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        if rng.random::<f64>() < self.p_salt {
            self.salt
        } else {
            self.pepper
        }
    }
}

fn check_view(fs: &MultiViewFeatureSet, view: usize) -> Result<()> {
    if view >= fs.n_views() {
        return Err(Error::param(
            "view",
            format!("index {view} out of range for {} views", fs.n_views()),
        ));
    }
    Ok(())
}

fn replace_view(fs: &MultiViewFeatureSet, view: usize, z: DMatrix<f64>) -> Result<MultiViewFeatureSet> {
    let mut views = fs.views().to_vec();
    views[view] = z;
    MultiViewFeatureSet::new(views)
}

/// Replaces whole instances of `view` by salt-and-pepper vectors matched to
/// the clean view's minimum, maximum and mean, then scaled by
/// `spec.magnitude`.
pub fn corrupt_instances(
    fs: &MultiViewFeatureSet,
    view: usize,
    spec: &NoiseSpec,
) -> Result<(MultiViewFeatureSet, CorruptionReport)> {
    spec.validate()?;
    check_view(fs, view)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let affected = spec.pick(fs.n_instances(), &mut rng)?;
    let source = SaltPepper::matching(fs.view(view));
    let mut z = fs.view(view).clone();
    for &i in &affected {
        for r in 0..z.nrows() {
            z[(r, i)] = source.draw(&mut rng) * spec.magnitude;
        }
    }
    let report = CorruptionReport {
        affected,
        ..Default::default()
    };
    Ok((replace_view(fs, view, z)?, report.check_empty("instances")))
}

/// Replaces a subset of the entries of every instance of `view`.
///
/// A fractional selection picks `round(fraction·d_v)` rows independently
/// per instance; an index selection uses the same rows for all instances.
/// Positions and levels are drawn before scaling by `spec.magnitude`, so
/// the magnitude changes amplitudes only.
pub fn corrupt_pixels(
    fs: &MultiViewFeatureSet,
    view: usize,
    spec: &NoiseSpec,
) -> Result<(MultiViewFeatureSet, CorruptionReport)> {
    spec.validate()?;
    check_view(fs, view)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let source = SaltPepper::matching(fs.view(view));
    let mut z = fs.view(view).clone();
    let mut rows = Vec::with_capacity(z.ncols());
    for i in 0..z.ncols() {
        let picked = spec.pick(z.nrows(), &mut rng)?;
        for &r in &picked {
            z[(r, i)] = source.draw(&mut rng) * spec.magnitude;
        }
        rows.push(picked);
    }
    let report = CorruptionReport {
        affected: (0..z.ncols()).collect(),
        rows,
        warning: None,
    };
    Ok((replace_view(fs, view, z)?, report.check_empty("entries")))
}

/// Where distance noise is added.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseTarget {
    /// Add to Euclidean distances, clamp at zero, then square.
    #[default]
    Raw,
    /// Add to squared distances and clamp at zero.
    Squared,
}

/// Adds `±magnitude` (equal odds) to every entry `(i, j)`, `i < j`, touching
/// a point of `affected`, mirrors it to `(j, i)` and returns the `ε` matrix.
fn salt_pepper_distances(
    base: &DMatrix<f64>,
    affected: &[usize],
    magnitude: f64,
    rng: &mut ChaCha8Rng,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = base.nrows();
    let mut hit = vec![false; n];
    for &i in affected {
        hit[i] = true;
    }
    let mut out = base.clone();
    let mut eps = DMatrix::zeros(n, n);
    for j in 1..n {
        for i in 0..j {
            if hit[i] || hit[j] {
                let e = if rng.random::<bool>() { magnitude } else { -magnitude };
                eps[(i, j)] = e;
                eps[(j, i)] = e;
                let v = (base[(i, j)] + e).max(0.0);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
    }
    (out, eps)
}

fn euclidean(points: &DMatrix<f64>) -> DMatrix<f64> {
    crate::linalg::pairwise_sq_dists(points).map(f64::sqrt)
}

fn noisy_view(
    dist: &DMatrix<f64>,
    affected: &[usize],
    magnitude: f64,
    target: NoiseTarget,
    rng: &mut ChaCha8Rng,
) -> (DMatrix<f64>, DMatrix<f64>) {
    match target {
        NoiseTarget::Raw => {
            let (noisy, eps) = salt_pepper_distances(dist, affected, magnitude, rng);
            (noisy.map(|x| x * x), eps)
        }
        NoiseTarget::Squared => {
            salt_pepper_distances(&dist.map(|x| x * x), affected, magnitude, rng)
        }
    }
}

/// Parameters of the two-view point-set reconstruction problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSetConfig {
    pub n_points: usize,
    /// Side of the square the default layout is drawn from.
    pub side: f64,
    /// Explicit `N × 2` layout; overrides `n_points` and `side`.
    pub points: Option<DMatrix<f64>>,
    /// Corrupted points of each view.
    pub corrupted: Vec<Vec<usize>>,
    pub magnitude: f64,
    pub target: NoiseTarget,
    pub seed: u64,
}

impl PointSetConfig {
    /// 25 points, the first four corrupted in view 1 and the last two in
    /// view 2, with magnitude 10.
    pub fn standard(seed: u64) -> Self {
        PointSetConfig {
            n_points: 25,
            side: 5.0,
            points: None,
            corrupted: vec![vec![0, 1, 2, 3], vec![23, 24]],
            magnitude: 10.0,
            target: NoiseTarget::Raw,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSetViews {
    pub points: DMatrix<f64>,
    pub views: DissimilarityViews,
    /// Squared distances of the true layout.
    pub clean: DMatrix<f64>,
    /// The `ε` added to each view, before clamping.
    pub perturbations: Vec<DMatrix<f64>>,
    pub corrupted: Vec<Vec<usize>>,
}

impl PointSetViews {
    /// Points corrupted in at least one view, sorted.
    pub fn noisy_points(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.corrupted.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn clean_points(&self) -> Vec<usize> {
        let noisy = self.noisy_points();
        (0..self.points.nrows()).filter(|i| !noisy.contains(i)).collect()
    }
}

pub fn gen_point_set_views(cfg: &PointSetConfig) -> Result<PointSetViews> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points = match &cfg.points {
        Some(p) => {
            if p.ncols() != 2 || p.nrows() < 2 {
                return Err(Error::DimensionMismatch(format!(
                    "point layout must be N×2 with N ≥ 2, got {:?}",
                    p.shape()
                )));
            }
            p.clone()
        }
        None => {
            if cfg.n_points < 2 || !(cfg.side > 0.0) {
                return Err(Error::param("n_points", "need at least two points in a square of positive side"));
            }
            DMatrix::from_fn(cfg.n_points, 2, |_, _| rng.random::<f64>() * cfg.side)
        }
    };
    let n = points.nrows();
    if cfg.corrupted.is_empty() {
        return Err(Error::param("corrupted", "at least one view is required"));
    }
    if let Some(&bad) = cfg.corrupted.iter().flatten().find(|&&i| i >= n) {
        return Err(Error::param("corrupted", format!("point {bad} out of range for {n}")));
    }
    if !(cfg.magnitude >= 0.0 && cfg.magnitude.is_finite()) {
        return Err(Error::param("magnitude", "must be finite and non-negative"));
    }
    let dist = euclidean(&points);
    let clean = dist.map(|x| x * x);
    let mut deltas = Vec::with_capacity(cfg.corrupted.len());
    let mut perturbations = Vec::with_capacity(cfg.corrupted.len());
    for affected in &cfg.corrupted {
        let (delta, eps) = noisy_view(&dist, affected, cfg.magnitude, cfg.target, &mut rng);
        deltas.push(delta);
        perturbations.push(eps);
    }
    Ok(PointSetViews {
        points,
        views: DissimilarityViews::new(deltas, None)?,
        clean,
        perturbations,
        corrupted: cfg.corrupted.clone(),
    })
}

/// Parameters of the clustered retrieval problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRetrievalConfig {
    pub classes: usize,
    pub per_class: usize,
    /// Fraction of the points corrupted in each view; the corrupted sets are
    /// disjoint across views.
    pub noise_fractions: Vec<f64>,
    /// Distance offset applied to corrupted pairs.
    pub magnitude: f64,
    /// Centroid spacing: class `c` sits at `separation·e_c`.
    pub separation: f64,
    /// Standard deviation of the within-class spread.
    pub spread: f64,
    pub seed: u64,
}

impl ClusterRetrievalConfig {
    pub fn new(classes: usize, per_class: usize, noise_fractions: Vec<f64>, seed: u64) -> Self {
        ClusterRetrievalConfig {
            classes,
            per_class,
            noise_fractions,
            magnitude: 1.0,
            separation: 1.0,
            spread: 0.1,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRetrievalViews {
    pub labels: Vec<usize>,
    pub points: DMatrix<f64>,
    pub views: DissimilarityViews,
    pub corrupted: Vec<Vec<usize>>,
}

pub fn gen_cluster_retrieval_views(cfg: &ClusterRetrievalConfig) -> Result<ClusterRetrievalViews> {
    if cfg.classes < 2 || cfg.per_class < 2 {
        return Err(Error::param("classes", "need at least two classes of two points"));
    }
    if cfg.noise_fractions.is_empty() {
        return Err(Error::param("noise_fractions", "at least one view is required"));
    }
    if cfg.noise_fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::param("noise_fractions", "must lie in [0, 1]"));
    }
    if cfg.noise_fractions.iter().sum::<f64>() > 1.0 + 1e-12 {
        return Err(Error::param("noise_fractions", "disjoint subsets cannot exceed all points"));
    }
    if !(cfg.spread >= 0.0) || !(cfg.magnitude >= 0.0) || !(cfg.separation > 0.0) {
        return Err(Error::param("spread", "spread, magnitude and separation must be non-negative"));
    }
    let n = cfg.classes * cfg.per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let labels: Vec<usize> = (0..n).map(|i| i / cfg.per_class).collect();
    let jitter = Normal::new(0.0, cfg.spread).map_err(|_| Error::param("spread", "invalid"))?;
    let points = DMatrix::from_fn(n, cfg.classes, |i, c| {
        let centre = if labels[i] == c { cfg.separation } else { 0.0 };
        centre + jitter.sample(&mut rng)
    });
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut corrupted = Vec::with_capacity(cfg.noise_fractions.len());
    let mut start = 0;
    for f in &cfg.noise_fractions {
        let k = ((f * n as f64).round() as usize).min(n - start);
        let mut set = order[start..start + k].to_vec();
        set.sort_unstable();
        corrupted.push(set);
        start += k;
    }
    let dist = euclidean(&points);
    let deltas = corrupted
        .iter()
        .map(|set| noisy_view(&dist, set, cfg.magnitude, NoiseTarget::Raw, &mut rng).0)
        .collect();
    Ok(ClusterRetrievalViews {
        labels,
        points,
        views: DissimilarityViews::new(deltas, None)?,
        corrupted,
    })
}

/// Parameters of a labelled multi-view feature set.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMultiViewConfig {
    pub classes: usize,
    pub per_class: usize,
    pub view_dims: Vec<usize>,
    pub latent_dim: usize,
    /// Distance of class means from the origin in the latent space.
    pub separation: f64,
    /// Within-class latent spread.
    pub spread: f64,
    /// Additive Gaussian noise in every view.
    pub view_noise: f64,
    pub seed: u64,
}

impl LabeledMultiViewConfig {
    pub fn new(classes: usize, per_class: usize, view_dims: Vec<usize>, latent_dim: usize, seed: u64) -> Self {
        LabeledMultiViewConfig {
            classes,
            per_class,
            view_dims,
            latent_dim,
            separation: 3.0,
            spread: 1.0,
            view_noise: 0.1,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMultiView {
    pub features: MultiViewFeatureSet,
    pub labels: Vec<usize>,
}

/// Instances of each class scatter around a random latent class mean; each
/// view is a random linear map of the latent point plus Gaussian noise,
/// rescaled to unit mean squared column norm.
pub fn gen_labeled_multiview(cfg: &LabeledMultiViewConfig) -> Result<LabeledMultiView> {
    if cfg.classes == 0 || cfg.per_class == 0 {
        return Err(Error::param("classes", "need at least one class and instance"));
    }
    if cfg.view_dims.is_empty() || cfg.view_dims.contains(&0) {
        return Err(Error::param("view_dims", "every view needs at least one row"));
    }
    if cfg.latent_dim == 0 {
        return Err(Error::param("latent_dim", "must be at least 1"));
    }
    if !(cfg.spread >= 0.0 && cfg.view_noise >= 0.0 && cfg.separation >= 0.0) {
        return Err(Error::param("spread", "spreads and separation must be non-negative"));
    }
    let n = cfg.classes * cfg.per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let means = gaussian_matrix(&mut rng, cfg.latent_dim, cfg.classes);
    let means = DMatrix::from_fn(cfg.latent_dim, cfg.classes, |r, c| {
        means[(r, c)] * cfg.separation / means.column(c).norm().max(f64::MIN_POSITIVE)
    });
    let labels: Vec<usize> = (0..n).map(|i| i / cfg.per_class).collect();
    let x = DMatrix::from_fn(cfg.latent_dim, n, |r, i| {
        let g: f64 = StandardNormal.sample(&mut rng);
        means[(r, labels[i])] + cfg.spread * g
    });
    let views = cfg
        .view_dims
        .iter()
        .map(|&dv| {
            let w = gaussian_matrix(&mut rng, dv, cfg.latent_dim) / (cfg.latent_dim as f64).sqrt();
            let noise = gaussian_matrix(&mut rng, dv, n) * cfg.view_noise;
            let z = w * &x + noise;
            let scale = (z.norm_squared() / n as f64).sqrt();
            z / scale
        })
        .collect();
    Ok(LabeledMultiView {
        features: MultiViewFeatureSet::new(views)?,
        labels,
    })
}
