use std::path::PathBuf;

use clap::{Args, ValueEnum};
use corrmv::datagen::{
    corrupt_instances, corrupt_pixels, gen_cluster_retrieval_views, gen_labeled_multiview,
    gen_planted_multiview, gen_point_set_views, ClusterRetrievalConfig, CorruptionReport,
    LabeledMultiViewConfig, NoiseKind, NoiseSpec, NoiseTarget, PointSetConfig,
};
use corrmv::embedding::DissimilarityViews;
use corrmv::features::MultiViewFeatureSet;
use serde_json::json;

use crate::error::Result;
use crate::io;
use crate::manifest::{ExperimentManifest, SolverId, Task};
use crate::Context;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    /// Noiseless views of a planted linear latent model.
    Planted,
    /// Labelled feature views, optionally with one view corrupted.
    Labeled,
    /// Two noisy distance views of a 2-D point set.
    Pointset,
    /// Distance views of clustered points with disjoint corruption.
    Cluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureNoise {
    None,
    Instance,
    Pixel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// Perturb distances, then square.
    Raw,
    /// Perturb squared distances.
    Squared,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub kind: SynthKind,
    /// Instance count of the planted model.
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long)]
    pub latent_dim: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub view_dims: Vec<usize>,
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub per_class: Option<usize>,
    #[arg(long, value_enum, default_value_t = FeatureNoise::None)]
    pub noise: FeatureNoise,
    /// Share of instances (instance noise) or entries (pixel noise) replaced.
    #[arg(long, default_value_t = 0.25)]
    pub fraction: f64,
    /// Noise magnitude; 10 for point sets, 1 otherwise.
    #[arg(long)]
    pub magnitude: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub noisy_view: usize,
    /// Corrupted share of points per view for clustered data.
    #[arg(long, value_delimiter = ',')]
    pub fractions: Vec<f64>,
    /// Fixed `N × 2` point layout instead of a random one.
    #[arg(long, value_name = "CSV")]
    pub points: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Target::Raw)]
    pub target: Target,
}

fn write_features(ctx: &Context, fs: &MultiViewFeatureSet) -> Result<Vec<PathBuf>> {
    let mut names = Vec::new();
    for (v, z) in fs.views().iter().enumerate() {
        let name = PathBuf::from(format!("view{}.csv", v + 1));
        io::write_matrix(&ctx.path(&name), z)?;
        names.push(name);
    }
    Ok(names)
}

fn write_dissimilarities(ctx: &Context, views: &DissimilarityViews) -> Result<Vec<PathBuf>> {
    let mut names = Vec::new();
    for (v, d) in views.deltas().iter().enumerate() {
        let name = PathBuf::from(format!("view{}.csv", v + 1));
        io::write_matrix(&ctx.path(&name), d)?;
        names.push(name);
    }
    Ok(names)
}

fn corruption_json(r: &CorruptionReport) -> serde_json::Value {
    json!({ "affected": r.affected, "rows": r.rows, "warning": r.warning })
}

pub fn run(ctx: &Context, a: SynthArgs) -> Result<()> {
    let seed = ctx.seed;
    let mut manifest;
    let params;
    match a.kind {
        SynthKind::Planted => {
            let d = a.latent_dim.unwrap_or(3);
            let dims = if a.view_dims.is_empty() { vec![10, 8] } else { a.view_dims.clone() };
            let p = gen_planted_multiview(a.instances, d, &dims, seed)?;
            manifest = ExperimentManifest::new(Task::FitMv);
            manifest.views = write_features(ctx, &p.features)?;
            io::write_matrix(&ctx.path("latent.csv"), &p.x)?;
            for (v, w) in p.w.iter().enumerate() {
                io::write_matrix(&ctx.path(format!("map{}.csv", v + 1)), w)?;
            }
            manifest.solver = Some(SolverId::Cmv);
            manifest.config = json!({ "latent_dim": d });
            params = json!({ "kind": "planted", "instances": a.instances, "latent_dim": d, "view_dims": dims });
        }
        SynthKind::Labeled => {
            let d = a.latent_dim.unwrap_or(10);
            let dims = if a.view_dims.is_empty() { vec![60, 12] } else { a.view_dims.clone() };
            let cfg = LabeledMultiViewConfig::new(a.classes.unwrap_or(10), a.per_class.unwrap_or(40), dims, d, seed);
            let data = gen_labeled_multiview(&cfg)?;
            let magnitude = a.magnitude.unwrap_or(1.0);
            let (fs, report) = match a.noise {
                FeatureNoise::None => (data.features, CorruptionReport::default()),
                FeatureNoise::Instance | FeatureNoise::Pixel => {
                    let kind = if a.noise == FeatureNoise::Instance {
                        NoiseKind::InstanceReplacement
                    } else {
                        NoiseKind::PixelReplacement
                    };
                    let mut spec = NoiseSpec::fraction(kind, a.fraction, seed.wrapping_add(1000));
                    spec.magnitude = magnitude;
                    if kind == NoiseKind::InstanceReplacement {
                        corrupt_instances(&data.features, a.noisy_view, &spec)?
                    } else {
                        corrupt_pixels(&data.features, a.noisy_view, &spec)?
                    }
                }
            };
            manifest = ExperimentManifest::new(Task::FitMv);
            manifest.views = write_features(ctx, &fs)?;
            io::write_labels(&ctx.path("labels.csv"), &data.labels)?;
            io::write_json(&ctx.path("corruption.json"), &corruption_json(&report))?;
            manifest.labels = Some("labels.csv".into());
            manifest.solver = Some(SolverId::Cmv);
            manifest.config = json!({ "latent_dim": d, "sigma": 0.5, "max_outer": 30 });
            params = json!({
                "kind": "labeled", "classes": cfg.classes, "per_class": cfg.per_class,
                "view_dims": cfg.view_dims, "latent_dim": d, "noise": format!("{:?}", a.noise),
                "fraction": a.fraction, "magnitude": magnitude, "noisy_view": a.noisy_view,
            });
        }
        SynthKind::Pointset => {
            let mut cfg = PointSetConfig::standard(seed);
            if let Some(p) = &a.points {
                cfg.points = Some(io::read_matrix(p)?);
            }
            cfg.magnitude = a.magnitude.unwrap_or(10.0);
            cfg.target = match a.target {
                Target::Raw => NoiseTarget::Raw,
                Target::Squared => NoiseTarget::Squared,
            };
            let data = gen_point_set_views(&cfg)?;
            manifest = ExperimentManifest::new(Task::Embed);
            manifest.views = write_dissimilarities(ctx, &data.views)?;
            io::write_matrix(&ctx.path("points.csv"), &data.points)?;
            io::write_json(&ctx.path("corruption.json"), &json!({ "corrupted": data.corrupted }))?;
            manifest.solver = Some(SolverId::Cmvree);
            manifest.config = json!({ "sigma": 3.0, "target_dim": 2 });
            params = json!({
                "kind": "pointset", "magnitude": cfg.magnitude, "target": format!("{:?}", a.target),
                "corrupted": cfg.corrupted, "points": a.points.as_ref().map(|p| p.display().to_string()),
            });
        }
        SynthKind::Cluster => {
            let fractions = if a.fractions.is_empty() { vec![0.2, 0.2] } else { a.fractions.clone() };
            let mut cfg = ClusterRetrievalConfig::new(a.classes.unwrap_or(9), a.per_class.unwrap_or(11), fractions, seed);
            if let Some(m) = a.magnitude {
                cfg.magnitude = m;
            }
            let data = gen_cluster_retrieval_views(&cfg)?;
            manifest = ExperimentManifest::new(Task::Embed);
            manifest.views = write_dissimilarities(ctx, &data.views)?;
            io::write_labels(&ctx.path("labels.csv"), &data.labels)?;
            io::write_matrix(&ctx.path("points.csv"), &data.points)?;
            io::write_json(&ctx.path("corruption.json"), &json!({ "corrupted": data.corrupted }))?;
            manifest.labels = Some("labels.csv".into());
            manifest.solver = Some(SolverId::Cmvree);
            manifest.config = json!({ "sigma": 1.5, "step": 0.01, "max_iter": 200, "target_dim": 8 });
            params = json!({
                "kind": "cluster", "classes": cfg.classes, "per_class": cfg.per_class,
                "fractions": cfg.noise_fractions, "magnitude": cfg.magnitude,
            });
        }
    }
    manifest.seed = Some(seed);
    io::write_json(&ctx.path("manifest.json"), &manifest)?;
    let inputs: Vec<PathBuf> = a.points.into_iter().collect();
    ctx.write_echo("synth", params, &inputs)
}
