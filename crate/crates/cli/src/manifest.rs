//! Experiment manifests and solver parameter blocks.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use corrmv::embedding::{EmbedConfig, StepSchedule};
use corrmv::features::CmvConfig;
use corrmv::loss::KernelSize;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Synth,
    FitMv,
    Embed,
    Eval,
    Recipe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverId {
    Cmv,
    Cemv,
    L2mv,
    Cauchymv,
    Cmds,
    Ree,
    Mvree,
    Cmvree,
}

impl SolverId {
    pub fn task(self) -> Task {
        match self {
            SolverId::Cmv | SolverId::Cemv | SolverId::L2mv | SolverId::Cauchymv => Task::FitMv,
            _ => Task::Embed,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverId::Cmv => "cmv",
            SolverId::Cemv => "cemv",
            SolverId::L2mv => "l2mv",
            SolverId::Cauchymv => "cauchymv",
            SolverId::Cmds => "cmds",
            SolverId::Ree => "ree",
            SolverId::Mvree => "mvree",
            SolverId::Cmvree => "cmvree",
        }
    }
}

/// What to run, on which files, with which parameters.
///
/// Relative paths are resolved against the manifest's own directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub views: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverId>,
    /// Parameter block of the solver, see [`FitParams`] and [`EmbedParams`].
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentManifest {
    pub fn new(task: Task) -> Self {
        ExperimentManifest {
            task,
            views: Vec::new(),
            labels: None,
            solver: None,
            config: serde_json::Value::Null,
            out: None,
            seed: None,
        }
    }

    /// Reads, resolves and validates a manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let mut m: ExperimentManifest = io::read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &PathBuf| if p.is_relative() { base.join(p) } else { p.clone() };
        m.views = m.views.iter().map(resolve).collect();
        m.labels = m.labels.as_ref().map(resolve);
        m.out = m.out.as_ref().map(resolve);
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for p in self.views.iter().chain(&self.labels) {
            if !p.is_file() {
                return Err(CliError::invalid(format!("manifest references missing file {}", p.display())));
            }
        }
        if let Some(s) = self.solver {
            if s.task() != self.task {
                return Err(CliError::invalid(format!(
                    "solver `{}` cannot run a {:?} task",
                    s.name(),
                    self.task
                )));
            }
        }
        Ok(())
    }

    /// Deserializes the parameter block, falling back to defaults.
    pub fn params<T: for<'de> Deserialize<'de> + Default>(&self) -> Result<T> {
        if self.config.is_null() {
            return Ok(T::default());
        }
        serde_json::from_value(self.config.clone())
            .map_err(|e| CliError::invalid(format!("manifest config block: {e}")))
    }
}

/// Parameters of the feature-view solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitParams {
    pub latent_dim: usize,
    pub sigma: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub rel_tol: f64,
    pub view_sigmas: Option<Vec<f64>>,
    /// Rescale every view to unit mean squared column norm.
    pub normalize: bool,
    /// Fit two copies of a single view.
    pub duplicate: bool,
}

impl Default for FitParams {
    fn default() -> Self {
        FitParams {
            latent_dim: 10,
            sigma: 1.0,
            c1: 1e-2,
            c2: 1e-2,
            max_outer: 50,
            max_inner: 5,
            rel_tol: 1e-6,
            view_sigmas: None,
            normalize: false,
            duplicate: false,
        }
    }
}

impl FitParams {
    pub fn to_config(&self, seed: u64) -> Result<CmvConfig> {
        let mut cfg = CmvConfig::new(self.latent_dim, self.sigma)?;
        cfg.c1 = self.c1;
        cfg.c2 = self.c2;
        cfg.max_outer = self.max_outer;
        cfg.max_inner = self.max_inner;
        cfg.rel_tol = self.rel_tol;
        cfg.view_sigmas = self.view_sigmas.clone();
        cfg.seed = seed;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    Fixed,
    InverseSqrt,
}

/// Parameters of the dissimilarity solvers. Unset step settings take the
/// solver's default: `η = 0.1` fixed for `cmvree`, `η₀ = 0.05` with
/// inverse square root decay for `ree` and `mvree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedParams {
    /// Kernel size; the median dissimilarity when unset.
    pub sigma: Option<f64>,
    pub alpha: f64,
    pub step: Option<f64>,
    pub schedule: Option<Schedule>,
    pub max_iter: usize,
    pub target_dim: usize,
    /// Inputs hold plain distances; square them on ingestion.
    pub square: bool,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            sigma: None,
            alpha: 2.0,
            step: None,
            schedule: None,
            max_iter: 500,
            target_dim: 2,
            square: false,
        }
    }
}

impl EmbedParams {
    pub fn to_config(&self, solver: SolverId, seed: u64) -> Result<EmbedConfig> {
        let mut cfg = match solver {
            SolverId::Cmvree => EmbedConfig::correntropy(0.1, self.target_dim),
            _ => EmbedConfig::l1(0.05, self.target_dim),
        };
        if let Some(s) = self.sigma {
            cfg.sigma = Some(KernelSize::new(s)?);
        }
        if let Some(step) = self.step {
            cfg.step = step;
        }
        if let Some(s) = self.schedule {
            cfg.schedule = match s {
                Schedule::Fixed => StepSchedule::Fixed,
                Schedule::InverseSqrt => StepSchedule::InverseSqrt,
            };
        }
        cfg.alpha = self.alpha;
        cfg.max_iter = self.max_iter;
        cfg.seed = seed;
        Ok(cfg)
    }
}
