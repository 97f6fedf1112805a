use std::path::PathBuf;

use clap::Args;
use corrmv::embedding::{cmds, ree_fit, ReeLoss};
use serde_json::json;

use super::views_or_manifest;
use crate::error::{CliError, Result};
use crate::ingest::ingest_dissimilarities;
use crate::io;
use crate::manifest::{EmbedParams, Schedule, SolverId, Task};
use crate::Context;

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long, value_enum)]
    pub solver: Option<SolverId>,
    /// Square `N × N` dissimilarity CSV. Repeat once per view.
    #[arg(long = "view", value_name = "CSV")]
    pub views: Vec<PathBuf>,
    /// Inputs hold plain distances; square them first.
    #[arg(long)]
    pub square: bool,
    #[arg(long)]
    pub target_dim: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, value_enum)]
    pub schedule: Option<Schedule>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

pub fn run(ctx: &Context, a: EmbedArgs) -> Result<()> {
    let mut params: EmbedParams = match &ctx.manifest {
        Some(m) => m.params()?,
        None => EmbedParams::default(),
    };
    params.square |= a.square;
    if let Some(k) = a.target_dim {
        params.target_dim = k;
    }
    params.sigma = a.sigma.or(params.sigma);
    params.step = a.step.or(params.step);
    params.schedule = a.schedule.or(params.schedule);
    if let Some(x) = a.alpha {
        params.alpha = x;
    }
    if let Some(m) = a.max_iter {
        params.max_iter = m;
    }
    let solver = a
        .solver
        .or(ctx.manifest.as_ref().and_then(|m| m.solver))
        .unwrap_or(SolverId::Cmvree);
    if solver.task() != Task::Embed {
        return Err(CliError::invalid(format!("`{}` is not a dissimilarity solver", solver.name())));
    }
    let inputs = views_or_manifest(ctx, a.views);
    let (views, corrections) = ingest_dissimilarities(&inputs, params.square)?;
    let cfg = params.to_config(solver, ctx.seed)?;
    let (result, sigma) = match solver {
        SolverId::Cmds => (cmds(&views.mean(), params.target_dim)?, None),
        SolverId::Ree => {
            if views.n_views() != 1 {
                return Err(CliError::invalid(format!(
                    "`ree` embeds one view, {} were given; use `mvree` or `cmvree`",
                    views.n_views()
                )));
            }
            (ree_fit(&views, &cfg, ReeLoss::L1)?, None)
        }
        SolverId::Mvree => (ree_fit(&views, &cfg, ReeLoss::L1)?, None),
        _ => {
            let s = cfg.resolve_sigma(&views)?.get();
            (ree_fit(&views, &cfg, ReeLoss::Correntropy)?, Some(s))
        }
    };
    io::write_matrix(&ctx.path("configuration.csv"), &result.x_k())?;
    if solver != SolverId::Cmds {
        io::write_trace(&ctx.path("trace.csv"), &result.trace)?;
    }
    let corrections: Vec<_> = corrections
        .iter()
        .map(|c| {
            json!({
                "max_asymmetry": c.max_asymmetry,
                "nonzero_diagonal": c.nonzero_diagonal,
                "negatives_clamped": c.negatives_clamped,
                "min_value": c.min_value,
                "clean": c.is_clean(),
            })
        })
        .collect();
    io::write_json(
        &ctx.path("embedding.json"),
        &json!({
            "solver": solver.name(),
            "n_points": views.n_points(),
            "target_dim": result.target_dim,
            "eigenvalues": result.eigenvalues.as_slice(),
            "sigma": sigma,
            "iterations": result.trace.iterations(),
            "objective": result.trace.last(),
            "corrections": corrections,
        }),
    )?;
    ctx.write_echo("embed", json!({ "solver": solver.name(), "params": params }), &inputs)
}
