//! End-to-end trials: generate, corrupt, solve, score.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::datagen::{
    corrupt_instances, corrupt_pixels, gen_cluster_retrieval_views, gen_labeled_multiview,
    gen_point_set_views, ClusterRetrievalConfig, CorruptionReport, LabeledMultiViewConfig,
    NoiseKind, NoiseSpec, PointSetConfig, PointSetViews,
};
use crate::embedding::{
    hadamard_combine, ree_fit, DissimilarityViews, EmbedConfig, EmbeddingResult, ReeLoss,
};
use crate::error::{Error, Result};
use crate::eval::{knn_classify_features, procrustes_rmse, retrieval_topk, LabeledSplit};
use crate::features::{
    cemv_fit, cmv_fit, l2mv_fit, CmvConfig, IntactSpaceModel, MultiViewFeatureSet,
};
use crate::linalg::pairwise_sq_dists;
use crate::trace::SolverTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMethod {
    /// One view, reduced by fitting two copies of it.
    SingleView(usize),
    /// All views stacked, reduced the same way.
    Concatenated,
    L2Mv,
    Cmv,
    Cemv,
}

impl FeatureMethod {
    pub fn all(n_views: usize) -> Vec<FeatureMethod> {
        let mut out: Vec<FeatureMethod> = (0..n_views).map(FeatureMethod::SingleView).collect();
        out.extend([
            FeatureMethod::Concatenated,
            FeatureMethod::L2Mv,
            FeatureMethod::Cmv,
            FeatureMethod::Cemv,
        ]);
        out
    }

    pub fn name(self) -> alloc::string::String {
        match self {
            FeatureMethod::SingleView(v) => alloc::format!("view{}", v + 1),
            FeatureMethod::Concatenated => "concatenated".into(),
            FeatureMethod::L2Mv => "l2mv".into(),
            FeatureMethod::Cmv => "cmv".into(),
            FeatureMethod::Cemv => "cemv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTrialConfig {
    pub data: LabeledMultiViewConfig,
    /// `InstanceReplacement` or `PixelReplacement`.
    pub noise: NoiseSpec,
    pub noisy_view: usize,
    pub solver: CmvConfig,
    /// Rescale every view to unit mean squared column norm after corruption.
    pub normalize: bool,
    pub train_fraction: f64,
    pub k: usize,
    pub methods: Vec<FeatureMethod>,
}

impl FeatureTrialConfig {
    /// Ten classes of 40 instances in a 60- and a 12-dimensional view; a
    /// quarter of the first view's instances are replaced by salt-and-pepper
    /// noise.
    pub fn instance_noise(seed: u64) -> Self {
        let data = LabeledMultiViewConfig::new(10, 40, alloc::vec![60, 12], 10, seed);
        let mut solver = CmvConfig::new(10, 0.5).expect("preset kernel size is positive");
        solver.max_outer = 30;
        solver.seed = seed;
        FeatureTrialConfig {
            data,
            noise: NoiseSpec::fraction(NoiseKind::InstanceReplacement, 0.25, seed + 1000),
            noisy_view: 0,
            solver,
            normalize: false,
            train_fraction: 0.5,
            k: 1,
            methods: FeatureMethod::all(2),
        }
    }

    /// Same data with half of the first view's entries replaced by
    /// salt-and-pepper values scaled by `magnitude`.
    pub fn pixel_noise(seed: u64, magnitude: f64) -> Self {
        let mut noise = NoiseSpec::fraction(NoiseKind::PixelReplacement, 0.5, seed + 1000);
        noise.magnitude = magnitude;
        FeatureTrialConfig {
            noise,
            ..FeatureTrialConfig::instance_noise(seed)
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeatureMethodResult {
    pub method: FeatureMethod,
    pub accuracy: f64,
    pub model: IntactSpaceModel,
}

#[derive(Debug, Clone)]
pub struct FeatureTrialOutcome {
    pub results: Vec<FeatureMethodResult>,
    pub labels: Vec<usize>,
    pub corruption: CorruptionReport,
}

impl FeatureTrialOutcome {
    pub fn get(&self, method: FeatureMethod) -> Option<&FeatureMethodResult> {
        self.results.iter().find(|r| r.method == method)
    }

    pub fn accuracy(&self, method: FeatureMethod) -> Option<f64> {
        self.get(method).map(|r| r.accuracy)
    }

    /// Mean weight magnitude `|a|` of `view` over `instances`, averaging
    /// entries first for the entrywise solver.
    pub fn mean_weight(&self, method: FeatureMethod, view: usize, instances: &[usize]) -> Option<f64> {
        let r = self.get(method)?;
        if instances.is_empty() {
            return None;
        }
        let per = r.model.weights.instance_means(view);
        Some(instances.iter().map(|&i| per[i].abs()).sum::<f64>() / instances.len() as f64)
    }

    /// Instances left untouched by instance replacement.
    pub fn clean_instances(&self) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|i| !self.corruption.affected.contains(i))
            .collect()
    }
}

fn reduce(fs: &MultiViewFeatureSet, method: FeatureMethod, cfg: &CmvConfig) -> Result<IntactSpaceModel> {
    match method {
        FeatureMethod::SingleView(v) => {
            if v >= fs.n_views() {
                return Err(Error::param("method", alloc::format!("no view {v}")));
            }
            cmv_fit(&MultiViewFeatureSet::duplicated(fs.view(v).clone())?, cfg)
        }
        FeatureMethod::Concatenated => cmv_fit(&MultiViewFeatureSet::duplicated(fs.concatenated())?, cfg),
        FeatureMethod::L2Mv => l2mv_fit(fs, cfg),
        FeatureMethod::Cmv => cmv_fit(fs, cfg),
        FeatureMethod::Cemv => cemv_fit(fs, cfg),
    }
}

/// Generates labelled views from `cfg.data` and runs
/// [`run_feature_trial_on`] on them.
pub fn run_feature_trial(cfg: &FeatureTrialConfig) -> Result<FeatureTrialOutcome> {
    let data = gen_labeled_multiview(&cfg.data)?;
    run_feature_trial_on(&data.features, &data.labels, cfg)
}

/// Corrupts one view of `features`, learns a latent representation with
/// every requested method and scores it with k-NN on a stratified split.
/// `cfg.data` only contributes its seed, which drives the split.
pub fn run_feature_trial_on(
    features: &MultiViewFeatureSet,
    labels: &[usize],
    cfg: &FeatureTrialConfig,
) -> Result<FeatureTrialOutcome> {
    if labels.len() != features.n_instances() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{} labels for {} instances",
            labels.len(),
            features.n_instances()
        )));
    }
    let (noisy, corruption) = match cfg.noise.kind {
        NoiseKind::InstanceReplacement => corrupt_instances(features, cfg.noisy_view, &cfg.noise)?,
        NoiseKind::PixelReplacement => corrupt_pixels(features, cfg.noisy_view, &cfg.noise)?,
        NoiseKind::DistanceSaltPepper => {
            return Err(Error::param("noise.kind", "distance noise does not apply to feature views"))
        }
    };
    let fs = if cfg.normalize { noisy.normalized()? } else { noisy };
    let split = LabeledSplit::stratified(labels.to_vec(), cfg.train_fraction, cfg.data.seed)?;
    let mut results = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let model = reduce(&fs, method, &cfg.solver)?;
        let accuracy = knn_classify_features(&model.x.transpose(), &split, cfg.k)?.accuracy;
        results.push(FeatureMethodResult {
            method,
            accuracy,
            model,
        });
    }
    Ok(FeatureTrialOutcome {
        results,
        labels: labels.to_vec(),
        corruption,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedMethod {
    /// L1 embedding of one view.
    SingleRee(usize),
    Mvree,
    Cmvree,
}

impl EmbedMethod {
    pub fn name(self) -> alloc::string::String {
        match self {
            EmbedMethod::SingleRee(v) => alloc::format!("ree_view{}", v + 1),
            EmbedMethod::Mvree => "mvree".into(),
            EmbedMethod::Cmvree => "cmvree".into(),
        }
    }
}

/// Solver settings shared by the dissimilarity trials.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedSettings {
    /// Used for the correntropy solver.
    pub correntropy: EmbedConfig,
    /// Used for the L1 solvers, single- and multi-view.
    pub l1: EmbedConfig,
}

impl EmbedSettings {
    fn fit(&self, views: &DissimilarityViews, method: EmbedMethod) -> Result<EmbeddingResult> {
        match method {
            EmbedMethod::SingleRee(v) => {
                if v >= views.n_views() {
                    return Err(Error::param("method", alloc::format!("no view {v}")));
                }
                ree_fit(&views.single(v), &self.l1, ReeLoss::L1)
            }
            EmbedMethod::Mvree => ree_fit(views, &self.l1, ReeLoss::L1),
            EmbedMethod::Cmvree => ree_fit(views, &self.correntropy, ReeLoss::Correntropy),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSetTrialConfig {
    pub data: PointSetConfig,
    pub solvers: EmbedSettings,
    pub methods: Vec<EmbedMethod>,
}

impl PointSetTrialConfig {
    /// Two views of 25 points; `σ = 3` and fixed `η = 0.1` for the
    /// correntropy solver, `η₀ = 0.05` with `η₀/√i` for the L1 solvers.
    pub fn standard(seed: u64) -> Self {
        let mut correntropy = EmbedConfig::correntropy(0.1, 2);
        correntropy.sigma = Some(crate::embedding::KernelProfile::PointSet.sigma());
        correntropy.seed = seed;
        let mut l1 = EmbedConfig::l1(0.05, 2);
        l1.seed = seed;
        PointSetTrialConfig {
            data: PointSetConfig::standard(seed),
            solvers: EmbedSettings { correntropy, l1 },
            methods: alloc::vec![
                EmbedMethod::SingleRee(0),
                EmbedMethod::SingleRee(1),
                EmbedMethod::Mvree,
                EmbedMethod::Cmvree,
            ],
        }
    }
}

#[derive(Debug, Clone)]
pub struct PointSetMethodResult {
    pub method: EmbedMethod,
    /// Aligned RMSE over points corrupted in some view.
    pub rmse_noisy: f64,
    /// Aligned RMSE over points clean in every view.
    pub rmse_clean: f64,
    pub rmse_all: f64,
    /// Recovered `N × 2` configuration.
    pub configuration: DMatrix<f64>,
    pub trace: SolverTrace,
}

#[derive(Debug, Clone)]
pub struct PointSetTrialOutcome {
    pub data: PointSetViews,
    pub results: Vec<PointSetMethodResult>,
}

impl PointSetTrialOutcome {
    pub fn get(&self, method: EmbedMethod) -> Option<&PointSetMethodResult> {
        self.results.iter().find(|r| r.method == method)
    }
}

pub fn run_point_set_trial(cfg: &PointSetTrialConfig) -> Result<PointSetTrialOutcome> {
    let data = gen_point_set_views(&cfg.data)?;
    let noisy = data.noisy_points();
    let clean = data.clean_points();
    let dim = data.points.ncols();
    let mut results = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let fit = cfg.solvers.fit(&data.views, method)?;
        let configuration = fit.x_full.columns(0, dim).into_owned();
        let score = |subset: &[usize]| -> Result<f64> {
            if subset.is_empty() {
                Ok(0.0)
            } else {
                procrustes_rmse(&configuration, &data.points, Some(subset))
            }
        };
        results.push(PointSetMethodResult {
            method,
            rmse_noisy: score(&noisy)?,
            rmse_clean: score(&clean)?,
            rmse_all: procrustes_rmse(&configuration, &data.points, None)?,
            configuration,
            trace: fit.trace,
        });
    }
    Ok(PointSetTrialOutcome { data, results })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetrievalMethod {
    /// The input view, unprocessed.
    Raw(usize),
    /// Entrywise geometric mean of the first two views.
    Hadamard,
    Embedded(EmbedMethod),
}

impl RetrievalMethod {
    pub fn name(self) -> alloc::string::String {
        match self {
            RetrievalMethod::Raw(v) => alloc::format!("raw_view{}", v + 1),
            RetrievalMethod::Hadamard => "hadamard".into(),
            RetrievalMethod::Embedded(m) => m.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalTrialConfig {
    pub data: ClusterRetrievalConfig,
    pub solvers: EmbedSettings,
    /// Neighbours inspected per query.
    pub k: usize,
    pub methods: Vec<RetrievalMethod>,
}

impl RetrievalTrialConfig {
    /// Nine classes of eleven points, two views with complementary
    /// corruption, top-10 retrieval on the leading eight coordinates.
    pub fn standard(seed: u64) -> Self {
        let mut correntropy = EmbedConfig::correntropy(0.01, 8);
        correntropy.sigma = Some(crate::embedding::KernelProfile::ShapeRetrieval.sigma());
        correntropy.max_iter = 200;
        correntropy.seed = seed;
        let mut l1 = EmbedConfig::l1(0.02, 8);
        l1.max_iter = 200;
        l1.seed = seed;
        RetrievalTrialConfig {
            data: ClusterRetrievalConfig::new(9, 11, alloc::vec![0.2, 0.2], seed),
            solvers: EmbedSettings { correntropy, l1 },
            k: 10,
            methods: alloc::vec![
                RetrievalMethod::Raw(0),
                RetrievalMethod::Raw(1),
                RetrievalMethod::Embedded(EmbedMethod::SingleRee(0)),
                RetrievalMethod::Embedded(EmbedMethod::SingleRee(1)),
                RetrievalMethod::Hadamard,
                RetrievalMethod::Embedded(EmbedMethod::Mvree),
                RetrievalMethod::Embedded(EmbedMethod::Cmvree),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalMethodResult {
    pub method: RetrievalMethod,
    pub total: usize,
    pub trace: Option<SolverTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalTrialOutcome {
    pub labels: Vec<usize>,
    pub results: Vec<RetrievalMethodResult>,
    /// Highest attainable total: `k` hits for every query.
    pub max_total: usize,
}

impl RetrievalTrialOutcome {
    pub fn total(&self, method: RetrievalMethod) -> Option<usize> {
        self.results.iter().find(|r| r.method == method).map(|r| r.total)
    }
}

pub fn run_retrieval_trial(cfg: &RetrievalTrialConfig) -> Result<RetrievalTrialOutcome> {
    let data = gen_cluster_retrieval_views(&cfg.data)?;
    let views = &data.views;
    let mut results = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let (dist, trace) = match method {
            RetrievalMethod::Raw(v) => {
                let d = views
                    .deltas()
                    .get(v)
                    .ok_or_else(|| Error::param("method", alloc::format!("no view {v}")))?;
                (d.clone(), None)
            }
            RetrievalMethod::Hadamard => {
                if views.n_views() < 2 {
                    return Err(Error::param("method", "the Hadamard combination needs two views"));
                }
                (hadamard_combine(&views.deltas()[0], &views.deltas()[1])?, None)
            }
            RetrievalMethod::Embedded(m) => {
                let fit = cfg.solvers.fit(views, m)?;
                (pairwise_sq_dists(&fit.x_k()), Some(fit.trace))
            }
        };
        let total = retrieval_topk(&dist, &data.labels, cfg.k)?.total;
        results.push(RetrievalMethodResult { method, total, trace });
    }
    Ok(RetrievalTrialOutcome {
        max_total: cfg.k.min(cfg.data.per_class - 1) * data.labels.len(),
        labels: data.labels,
        results,
    })
}

