use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use corrmv::datagen::{NoiseKind, NoiseSpec};
use corrmv::experiments::{
    run_feature_trial, run_feature_trial_on, run_point_set_trial, run_retrieval_trial,
    FeatureMethod, FeatureTrialConfig, FeatureTrialOutcome, PointSetTrialConfig, RetrievalTrialConfig,
};
use corrmv::features::{AuxWeights, MultiViewFeatureSet};
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::ingest::{ingest_mfeat, MFEAT_CLASSES};
use crate::io;
use crate::Context;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecipeName {
    /// Accuracy and weights as whole instances of one view turn to noise.
    #[value(name = "uci-noise-1")]
    UciNoise1,
    /// Accuracy and weights as a share of every instance's entries turn to noise.
    #[value(name = "uci-noise-2")]
    UciNoise2,
    /// Point-set reconstruction from two corrupted distance views.
    #[value(name = "pointset-25")]
    Pointset25,
    /// Top-10 retrieval on fused clustered distance views.
    #[value(name = "cluster-retrieval")]
    ClusterRetrieval,
}

impl RecipeName {
    fn name(self) -> &'static str {
        match self {
            RecipeName::UciNoise1 => "uci-noise-1",
            RecipeName::UciNoise2 => "uci-noise-2",
            RecipeName::Pointset25 => "pointset-25",
            RecipeName::ClusterRetrieval => "cluster-retrieval",
        }
    }
}

#[derive(Debug, Args)]
pub struct RecipeArgs {
    #[arg(value_enum)]
    pub name: RecipeName,
    /// Number of consecutive seeds, starting at `--seed`.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Feature recipes: 200 instances per class instead of 40.
    #[arg(long)]
    pub full: bool,
    /// Feature recipes: use the UCI `mfeat-pix` and `mfeat-zer` files in
    /// this directory instead of synthetic views.
    #[arg(long, value_name = "DIR")]
    pub mfeat: Option<PathBuf>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn run(ctx: &Context, a: RecipeArgs) -> Result<()> {
    if a.seeds == 0 {
        return Err(CliError::invalid("--seeds must be at least 1"));
    }
    let seeds: Vec<u64> = (ctx.seed..ctx.seed + a.seeds).collect();
    let (summary, inputs) = match a.name {
        RecipeName::UciNoise1 | RecipeName::UciNoise2 => feature_recipe(ctx, &a, &seeds)?,
        RecipeName::Pointset25 => (pointset(ctx, &seeds)?, Vec::new()),
        RecipeName::ClusterRetrieval => (retrieval(ctx, &seeds)?, Vec::new()),
    };
    io::write_json(&ctx.path("summary.json"), &summary)?;
    ctx.write_echo(
        "recipe",
        json!({
            "recipe": a.name.name(),
            "seeds": seeds,
            "full": a.full,
            "mfeat": a.mfeat.as_ref().map(|p| p.display().to_string()),
        }),
        &inputs,
    )
}

/// Keeps the first `per_class` instances of every class.
fn subsample(fs: &MultiViewFeatureSet, labels: &[usize], per_class: usize) -> Result<(MultiViewFeatureSet, Vec<usize>)> {
    let mut seen = vec![0usize; MFEAT_CLASSES];
    let keep: Vec<usize> = (0..labels.len())
        .filter(|&i| {
            seen[labels[i]] += 1;
            seen[labels[i]] <= per_class
        })
        .collect();
    Ok((fs.permuted(&keep), keep.iter().map(|&i| labels[i]).collect()))
}

fn mean_abs(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), x| (s + x.abs(), n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Weight statistics of one trial: per-instance means for both correntropy
/// solvers and, for the entrywise solver, corrupted versus clean entries.
fn weight_stats(out: &FeatureTrialOutcome) -> Value {
    let all: Vec<usize> = (0..out.labels.len()).collect();
    let clean = out.clean_instances();
    let mut stats = serde_json::Map::new();
    for m in [FeatureMethod::Cmv, FeatureMethod::Cemv] {
        let Some(r) = out.get(m) else { continue };
        let mut entry = json!({
            "a1_clean_instances": out.mean_weight(m, 0, &clean),
            "a1_noisy_instances": out.mean_weight(m, 0, &out.corruption.affected),
            "a1_all": out.mean_weight(m, 0, &all),
            "a2_all": out.mean_weight(m, 1, &all),
        });
        if let (AuxWeights::PerEntry(a), false) = (&r.model.weights, out.corruption.rows.is_empty()) {
            let a1 = &a[0];
            let hit = |r: usize, i: usize| out.corruption.rows[i].contains(&r);
            let noisy = (0..a1.ncols()).flat_map(|i| (0..a1.nrows()).filter(move |&r| hit(r, i)).map(move |r| a1[(r, i)]));
            let kept = (0..a1.ncols()).flat_map(|i| (0..a1.nrows()).filter(move |&r| !hit(r, i)).map(move |r| a1[(r, i)]));
            entry["a1_noisy_entries"] = json!(mean_abs(noisy));
            entry["a1_clean_entries"] = json!(mean_abs(kept));
        }
        stats.insert(m.name(), entry);
    }
    Value::Object(stats)
}

fn feature_recipe(ctx: &Context, a: &RecipeArgs, seeds: &[u64]) -> Result<(Value, Vec<PathBuf>)> {
    let per_class = if a.full { 200 } else { 40 };
    let (real, inputs) = match &a.mfeat {
        Some(dir) => {
            let names = vec!["pix".to_string(), "zer".to_string()];
            let (fs, labels, _) = ingest_mfeat(dir, &names, true)?;
            let inputs = names.iter().map(|n| dir.join(format!("mfeat-{n}"))).collect();
            (Some(subsample(&fs, &labels, per_class)?), inputs)
        }
        None => (None, Vec::new()),
    };
    // (noise kind, fraction, magnitude) grid
    let grid: Vec<(NoiseKind, f64, f64)> = match a.name {
        RecipeName::UciNoise1 => [0.0, 0.125, 0.25, 0.5]
            .into_iter()
            .map(|f| (NoiseKind::InstanceReplacement, f, 1.0))
            .collect(),
        _ => [1.0, 3.0]
            .into_iter()
            .flat_map(|m| [0.0, 0.25, 0.5, 0.75].into_iter().map(move |f| (NoiseKind::PixelReplacement, f, m)))
            .collect(),
    };
    let mut trials = Vec::new();
    let mut cells = Vec::new();
    for &(kind, fraction, magnitude) in &grid {
        let mut per_method: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for &seed in seeds {
            let mut cfg = FeatureTrialConfig::instance_noise(seed);
            cfg.data.per_class = per_class;
            cfg.noise = NoiseSpec {
                magnitude,
                ..NoiseSpec::fraction(kind, fraction, seed.wrapping_add(1000))
            };
            let out = match &real {
                Some((fs, labels)) => {
                    cfg.data.view_dims = fs.view_dims();
                    run_feature_trial_on(fs, labels, &cfg)?
                }
                None => run_feature_trial(&cfg)?,
            };
            let dir = ctx.path(format!("fraction-{fraction}-magnitude-{magnitude}/seed-{seed}"));
            io::ensure_dir(&dir)?;
            let mut acc = BTreeMap::new();
            for r in &out.results {
                io::write_trace(&dir.join(format!("trace_{}.csv", r.method.name())), &r.model.trace)?;
                acc.insert(r.method.name(), r.accuracy);
                per_method.entry(r.method.name()).or_default().push(r.accuracy);
            }
            trials.push(json!({
                "fraction": fraction,
                "magnitude": magnitude,
                "seed": seed,
                "accuracy": acc,
                "weights": weight_stats(&out),
                "warning": out.corruption.warning,
            }));
        }
        let medians: BTreeMap<String, f64> = per_method.into_iter().map(|(k, v)| (k, median(v))).collect();
        cells.push(json!({ "fraction": fraction, "magnitude": magnitude, "median_accuracy": medians }));
    }
    let summary = json!({
        "recipe": a.name.name(),
        "data": if a.mfeat.is_some() { "mfeat pix+zer" } else { "synthetic" },
        "instances_per_class": per_class,
        "classifier": "1-nearest-neighbour on a stratified half split",
        "seeds": seeds,
        "grid": cells,
        "trials": trials,
    });
    Ok((summary, inputs))
}

fn pointset(ctx: &Context, seeds: &[u64]) -> Result<Value> {
    let mut trials = Vec::new();
    let mut per_method: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for &seed in seeds {
        let out = run_point_set_trial(&PointSetTrialConfig::standard(seed))?;
        let dir = ctx.path(format!("seed-{seed}"));
        io::ensure_dir(&dir)?;
        io::write_matrix(&dir.join("points.csv"), &out.data.points)?;
        for (v, d) in out.data.views.deltas().iter().enumerate() {
            io::write_matrix(&dir.join(format!("view{}.csv", v + 1)), d)?;
        }
        let mut rmse = BTreeMap::new();
        for r in &out.results {
            let name = r.method.name();
            io::write_matrix(&dir.join(format!("configuration_{name}.csv")), &r.configuration)?;
            io::write_trace(&dir.join(format!("trace_{name}.csv")), &r.trace)?;
            rmse.insert(name.clone(), json!({ "noisy": r.rmse_noisy, "clean": r.rmse_clean, "all": r.rmse_all }));
            per_method.entry(name).or_default().push(r.rmse_noisy);
        }
        trials.push(json!({ "seed": seed, "noisy_points": out.data.noisy_points(), "rmse": rmse }));
    }
    let medians: BTreeMap<String, f64> = per_method.into_iter().map(|(k, v)| (k, median(v))).collect();
    Ok(json!({
        "recipe": "pointset-25",
        "seeds": seeds,
        "median_rmse_noisy_points": medians,
        "trials": trials,
    }))
}

fn retrieval(ctx: &Context, seeds: &[u64]) -> Result<Value> {
    let mut trials = Vec::new();
    let mut per_method: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut max_total = 0;
    for &seed in seeds {
        let out = run_retrieval_trial(&RetrievalTrialConfig::standard(seed))?;
        max_total = out.max_total;
        let dir = ctx.path(format!("seed-{seed}"));
        io::ensure_dir(&dir)?;
        let mut totals = BTreeMap::new();
        for r in &out.results {
            let name = r.method.name();
            if let Some(t) = &r.trace {
                io::write_trace(&dir.join(format!("trace_{name}.csv")), t)?;
            }
            totals.insert(name.clone(), r.total);
            per_method.entry(name).or_default().push(r.total as f64);
        }
        trials.push(json!({ "seed": seed, "totals": totals }));
    }
    let medians: BTreeMap<String, f64> = per_method.into_iter().map(|(k, v)| (k, median(v))).collect();
    Ok(json!({
        "recipe": "cluster-retrieval",
        "seeds": seeds,
        "max_total": max_total,
        "median_total": medians,
        "trials": trials,
    }))
}
