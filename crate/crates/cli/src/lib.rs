//! Command-line front end of `corrmv`: ingestion, solver runs, evaluation
//! and end-to-end experiment recipes.

pub mod commands;
pub mod error;
pub mod ingest;
pub mod io;
pub mod manifest;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

pub use error::{CliError, Result};
use manifest::{ExperimentManifest, Task};

#[derive(Debug, Parser)]
#[command(name = "corrmv", version, about = "Robust multi-view learning with correntropy losses")]
pub struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Experiment manifest (JSON) supplying inputs, solver and parameters.
    #[arg(long, global = true, value_name = "JSON")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic views and a manifest that runs a solver on them.
    Synth(commands::synth::SynthArgs),
    /// Learn a shared latent representation from feature views.
    FitMv(commands::fit::FitArgs),
    /// Embed dissimilarity views into a Euclidean configuration.
    Embed(commands::embed::EmbedArgs),
    /// Score features, distances or configurations.
    Eval(commands::eval::EvalArgs),
    /// Run a complete generate, solve and score pipeline.
    Recipe(commands::recipe::RecipeArgs),
}

impl Command {
    fn task(&self) -> Task {
        match self {
            Command::Synth(_) => Task::Synth,
            Command::FitMv(_) => Task::FitMv,
            Command::Embed(_) => Task::Embed,
            Command::Eval(_) => Task::Eval,
            Command::Recipe(_) => Task::Recipe,
        }
    }
}

/// Settings shared by every command after merging flags over the manifest.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub out: PathBuf,
    pub manifest: Option<ExperimentManifest>,
}

impl Context {
    pub fn path(&self, name: impl AsRef<Path>) -> PathBuf {
        self.out.join(name)
    }

    /// Writes `run.json`: everything needed to repeat the run, including
    /// hashes of the input files.
    pub fn write_echo(&self, command: &str, params: Value, inputs: &[PathBuf]) -> Result<()> {
        #[derive(Serialize)]
        struct Input {
            path: String,
            sha256: String,
        }
        #[derive(Serialize)]
        struct Echo<'a> {
            tool: &'a str,
            version: &'a str,
            command: &'a str,
            seed: u64,
            params: Value,
            inputs: Vec<Input>,
        }
        let inputs = inputs
            .iter()
            .map(|p| {
                Ok(Input {
                    path: p.display().to_string(),
                    sha256: io::sha256_file(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        io::write_json(
            &self.path("run.json"),
            &Echo {
                tool: "corrmv",
                version: env!("CARGO_PKG_VERSION"),
                command,
                seed: self.seed,
                params,
                inputs,
            },
        )
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let manifest = match &cli.config {
        Some(p) => {
            let m = ExperimentManifest::load(p)?;
            if m.task != cli.command.task() {
                return Err(CliError::invalid(format!(
                    "manifest {} describes a {:?} task, not {:?}",
                    p.display(),
                    m.task,
                    cli.command.task()
                )));
            }
            Some(m)
        }
        None => None,
    };
    let seed = cli.seed.or(manifest.as_ref().and_then(|m| m.seed)).unwrap_or(0);
    let out = cli
        .out
        .clone()
        .or(manifest.as_ref().and_then(|m| m.out.clone()))
        .unwrap_or_else(|| PathBuf::from("corrmv-out"));
    io::ensure_dir(&out)?;
    let ctx = Context { seed, out, manifest };
    match cli.command {
        Command::Synth(a) => commands::synth::run(&ctx, a),
        Command::FitMv(a) => commands::fit::run(&ctx, a),
        Command::Embed(a) => commands::embed::run(&ctx, a),
        Command::Eval(a) => commands::eval::run(&ctx, a),
        Command::Recipe(a) => commands::recipe::run(&ctx, a),
    }
}
