use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

mod config;
mod run;

use config::{ExperimentConfig, Overrides, Task};

/// Differentiable Euler Characteristic Transform experiments.
#[derive(Debug, Parser)]
#[command(name = "dect", version)]
struct Cli {
    /// Task to run.
    #[arg(value_enum)]
    task: Task,
    /// Flat TOML config, or the manifest.json of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of directions.
    #[arg(long)]
    directions: Option<usize>,
    /// Number of height samples.
    #[arg(long)]
    heights: Option<usize>,
    /// Sigmoid sharpness.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// ECT normalisation.
    #[arg(long, value_parser = ["none", "vertex", "l2"])]
    normalize: Option<String>,
    /// Keep directions on the unit sphere.
    #[arg(long)]
    constrained: Option<bool>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_cli(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dect: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run_cli(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    config.apply(Overrides {
        directions: cli.directions,
        heights: cli.heights,
        lambda: cli.lambda,
        seed: cli.seed,
        normalize: cli.normalize,
        constrained: cli.constrained,
        out: cli.out,
    });
    config.resolve(cli.task)?;
    let manifest = run::run(cli.task, &config)?;
    println!(
        "{} finished; outputs in {}",
        cli.task.name(),
        config.output.display()
    );
    if let Some(results) = manifest.get("results").and_then(|r| r.as_object()) {
        for (k, v) in results {
            println!("  {k}: {v}");
        }
    }
    Ok(())
}
