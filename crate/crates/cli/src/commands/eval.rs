use std::path::PathBuf;

use clap::{Args, Subcommand};
use corrmv::eval::{
    confusion_matrix, knn_classify_distances, knn_classify_features, procrustes_rmse,
    retrieval_topk, retrieval_topk_configuration, LabeledSplit,
};
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::io;
use crate::Context;

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(subcommand)]
    pub metric: Metric,
}

#[derive(Debug, Subcommand)]
pub enum Metric {
    /// k-nearest-neighbour accuracy on a stratified split.
    Knn(KnnArgs),
    /// Same-class hits among the k nearest neighbours of every point.
    Retrieval(RetrievalArgs),
    /// Root mean squared error after rigid alignment.
    Procrustes(ProcrustesArgs),
}

#[derive(Debug, Args)]
pub struct KnnArgs {
    /// Latent features as written by `fit-mv` (columns are instances).
    #[arg(long, value_name = "CSV", required_unless_present = "distances")]
    pub features: Option<PathBuf>,
    /// Precomputed `N × N` distances instead of features.
    #[arg(long, value_name = "CSV", conflicts_with = "features")]
    pub distances: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct RetrievalArgs {
    #[arg(long, value_name = "CSV", required_unless_present = "configuration")]
    pub distances: Option<PathBuf>,
    /// Point configuration, one point per row, as written by `embed`.
    #[arg(long, value_name = "CSV", conflicts_with = "distances")]
    pub configuration: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct ProcrustesArgs {
    #[arg(long, value_name = "CSV")]
    pub estimate: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub reference: PathBuf,
    /// Rows scored after alignment; all rows when omitted.
    #[arg(long, value_delimiter = ',')]
    pub subset: Vec<usize>,
}

fn labels_path(ctx: &Context, flag: Option<PathBuf>) -> Result<PathBuf> {
    flag.or_else(|| ctx.manifest.as_ref().and_then(|m| m.labels.clone()))
        .ok_or_else(|| CliError::invalid("a labels file is required"))
}

pub fn run(ctx: &Context, a: EvalArgs) -> Result<()> {
    let (name, settings, score, inputs): (&str, Value, Value, Vec<PathBuf>) = match a.metric {
        Metric::Knn(k) => {
            let lp = labels_path(ctx, k.labels)?;
            let labels = io::read_labels(&lp)?;
            let split = LabeledSplit::stratified(labels.clone(), k.train_fraction, ctx.seed)?;
            let (outcome, input) = match (&k.features, &k.distances) {
                (Some(f), _) => (knn_classify_features(&io::read_matrix(f)?.transpose(), &split, k.k)?, f.clone()),
                (None, Some(d)) => (knn_classify_distances(&io::read_matrix(d)?, &split, k.k)?, d.clone()),
                (None, None) => return Err(CliError::invalid("give --features or --distances")),
            };
            let truth: Vec<usize> = split.test().iter().map(|&i| labels[i]).collect();
            let classes = labels.iter().max().map_or(0, |m| m + 1);
            let confusion = confusion_matrix(&outcome.predictions, &truth, classes)?;
            let rows: Vec<Vec<usize>> = confusion.row_iter().map(|r| r.iter().copied().collect()).collect();
            let score = json!({
                "metric": "knn",
                "k": k.k,
                "train_fraction": k.train_fraction,
                "accuracy": outcome.accuracy,
                "test": split.test(),
                "predictions": outcome.predictions,
                "confusion": rows,
            });
            let settings = json!({ "k": k.k, "train_fraction": k.train_fraction });
            ("eval-knn", settings, score, vec![input, lp])
        }
        Metric::Retrieval(r) => {
            let lp = labels_path(ctx, r.labels)?;
            let labels = io::read_labels(&lp)?;
            let (s, input) = match (&r.distances, &r.configuration) {
                (Some(d), _) => (retrieval_topk(&io::read_matrix(d)?, &labels, r.k)?, d.clone()),
                (None, Some(c)) => (retrieval_topk_configuration(&io::read_matrix(c)?, &labels, r.k)?, c.clone()),
                (None, None) => return Err(CliError::invalid("give --distances or --configuration")),
            };
            let score = json!({ "metric": "retrieval", "k": r.k, "total": s.total, "per_query": s.per_query });
            ("eval-retrieval", json!({ "k": r.k }), score, vec![input, lp])
        }
        Metric::Procrustes(p) => {
            let est = io::read_matrix(&p.estimate)?;
            let reference = io::read_matrix(&p.reference)?;
            let subset = (!p.subset.is_empty()).then_some(p.subset.as_slice());
            if let Some(&bad) = p.subset.iter().find(|&&i| i >= reference.nrows()) {
                return Err(CliError::invalid(format!("subset row {bad} is out of range")));
            }
            let rmse = procrustes_rmse(&est, &reference, subset)?;
            let score = json!({ "metric": "procrustes", "rmse": rmse, "subset": p.subset });
            ("eval-procrustes", json!({ "subset": p.subset }), score, vec![p.estimate, p.reference])
        }
    };
    io::write_json(&ctx.path("eval.json"), &score)?;
    println!("{score}");
    ctx.write_echo(name, settings, &inputs)
}
