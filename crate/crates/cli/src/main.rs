//! `arc`: run one experiment from a JSON config and write CSV tables plus
//! a manifest into an output directory.

mod config;
mod output;
mod run;

use anyhow::{Context, Result};
use clap::Parser;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "arc", version, about = "Steady states of fermionic junctions with accumulative reservoirs")]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: run::Experiment,
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, short)]
    workers: Option<usize>,
    /// Override a config value, e.g. `--set model.reservoirs.n_modes=256`.
    /// The value is parsed as JSON, falling back to a plain string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    dry_run: bool,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker pool")?;
    }
    let (text, origin) = match &cli.config {
        Some(p) => (Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?), p.display().to_string()),
        None => (None, "defaults".to_string()),
    };
    let cfg = config::load(text.as_deref(), &origin, &cli.overrides)?;
    let echo = serde_json::to_value(&cfg)?;
    if cli.dry_run {
        println!("{}", serde_json::to_string_pretty(&echo)?);
        return Ok(());
    }

    let start = Instant::now();
    let mut out = output::Output::new(&cli.out)?;
    let name = cli.experiment.name();
    log::info!("running {name} into {}", out.dir().display());
    let summary = run::run(cli.experiment, &cfg, &mut out)?;
    let manifest = out.manifest(name, &echo, start.elapsed().as_secs_f64(), summary.clone())?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    log::info!("manifest: {}", manifest.display());
    if !out.failures().is_empty() {
        log::warn!("{} point(s) failed; see the manifest", out.failures().len());
    }
    Ok(())
}
