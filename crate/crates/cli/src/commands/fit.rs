use std::path::PathBuf;

use clap::Args;
use corrmv::features::{cauchymv_fit, cemv_fit, cmv_fit, l2mv_fit, AuxWeights};
use serde_json::json;

use super::views_or_manifest;
use crate::error::{CliError, Result};
use crate::ingest::{ingest_features, ingest_mfeat};
use crate::io;
use crate::manifest::{FitParams, SolverId, Task};
use crate::Context;

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub solver: Option<SolverId>,
    /// Feature view CSV, rows are dimensions and columns instances. Repeat
    /// once per view.
    #[arg(long = "view", value_name = "CSV")]
    pub views: Vec<PathBuf>,
    /// Directory holding the UCI `mfeat-*` files.
    #[arg(long, value_name = "DIR", conflicts_with = "views")]
    pub mfeat: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "pix,zer")]
    pub mfeat_views: Vec<String>,
    #[arg(long)]
    pub latent_dim: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    /// Rescale every view to unit mean squared column norm.
    #[arg(long)]
    pub normalize: bool,
    /// Fit two copies of a single view.
    #[arg(long)]
    pub duplicate: bool,
}

pub fn run(ctx: &Context, a: FitArgs) -> Result<()> {
    let mut params: FitParams = match &ctx.manifest {
        Some(m) => m.params()?,
        None => FitParams::default(),
    };
    if let Some(d) = a.latent_dim {
        params.latent_dim = d;
    }
    if let Some(s) = a.sigma {
        params.sigma = s;
    }
    if let Some(m) = a.max_outer {
        params.max_outer = m;
    }
    params.normalize |= a.normalize;
    params.duplicate |= a.duplicate;
    let solver = a
        .solver
        .or(ctx.manifest.as_ref().and_then(|m| m.solver))
        .unwrap_or(SolverId::Cmv);
    if solver.task() != Task::FitMv {
        return Err(CliError::invalid(format!("`{}` is not a feature-view solver", solver.name())));
    }

    let views = views_or_manifest(ctx, a.views);
    let (fs, report, inputs) = match &a.mfeat {
        Some(dir) => {
            let (fs, labels, report) = ingest_mfeat(dir, &a.mfeat_views, params.normalize)?;
            io::write_labels(&ctx.path("labels.csv"), &labels)?;
            let inputs = a.mfeat_views.iter().map(|n| dir.join(format!("mfeat-{n}"))).collect();
            (fs, report, inputs)
        }
        None => {
            let (fs, report) = ingest_features(&views, params.duplicate, params.normalize)?;
            (fs, report, views)
        }
    };
    let cfg = params.to_config(ctx.seed)?;
    let model = match solver {
        SolverId::Cmv => cmv_fit(&fs, &cfg)?,
        SolverId::Cemv => cemv_fit(&fs, &cfg)?,
        SolverId::L2mv => l2mv_fit(&fs, &cfg)?,
        _ => cauchymv_fit(&fs, &cfg)?,
    };

    io::write_matrix(&ctx.path("x.csv"), &model.x)?;
    for (v, w) in model.w.iter().enumerate() {
        io::write_matrix(&ctx.path(format!("w{}.csv", v + 1)), w)?;
    }
    match &model.weights {
        AuxWeights::PerInstance(a) => io::write_matrix(&ctx.path("weights.csv"), a)?,
        AuxWeights::PerEntry(a) => {
            for (v, m) in a.iter().enumerate() {
                io::write_matrix(&ctx.path(format!("weights{}.csv", v + 1)), m)?;
            }
        }
    }
    io::write_trace(&ctx.path("trace.csv"), &model.trace)?;
    let mean_weights: Vec<f64> = (0..fs.n_views())
        .map(|v| {
            let m = model.weights.instance_means(v);
            m.iter().map(|x| x.abs()).sum::<f64>() / m.len().max(1) as f64
        })
        .collect();
    io::write_json(
        &ctx.path("model.json"),
        &json!({
            "solver": solver.name(),
            "iterations": model.trace.iterations(),
            "stop": format!("{:?}", model.trace.stop),
            "objective": model.trace.last(),
            "mean_abs_weight": mean_weights,
            "mean_residual": model.mean_residual(&fs),
            "ingest": report,
        }),
    )?;
    ctx.write_echo(
        "fit-mv",
        json!({
            "solver": solver.name(),
            "params": params,
            "mfeat": a.mfeat.as_ref().map(|p| p.display().to_string()),
            "mfeat_views": a.mfeat.as_ref().map(|_| &a.mfeat_views),
        }),
        &inputs,
    )
}
