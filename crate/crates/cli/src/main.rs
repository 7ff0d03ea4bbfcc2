//! `screensig`: drive screen scattering, eigenvalue and indicator computations from a JSON config.

mod commands;
mod config;
mod output;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

use commands::RunContext;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "screensig", version, about)]
struct Cli {
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for cached auxiliary operators.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Replace the noise seed (and the probe seed with seed + 1).
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check uniqueness and existence conditions of the configured tensor.
    CheckTensor,
    /// Eigenvalues in the real strip spanned by the lambda grid.
    Eigs {
        #[arg(long, default_value_t = 40)]
        nmax: usize,
    },
    /// Eigenvalues along the family (a, s·b).
    Trace {
        #[arg(long, default_value_t = 40)]
        nmax: usize,
    },
    /// Plane-wave scattering; writes far-field samples on the grid.
    Forward,
    /// Assembles the (noisy) far-field operator, or the auxiliary one with --lambda.
    Faroperator {
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
    },
    /// Indicator scan over the lambda grid, followed by peak detection.
    Scan {
        /// Far-field data in FFO1 format; assembled from the config if omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Also write a gnuplot script.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Peak detection on an existing indicator.csv.
    Peaks {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed_override {
        cfg.override_seeds(seed);
    }
    if let Some(dir) = cli.output_dir {
        cfg.output_dir = dir;
    }
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker pool")?;
    }
    let ctx = RunContext { cfg, cache: cli.cache };
    match cli.command {
        Command::CheckTensor => commands::check_tensor(&ctx),
        Command::Eigs { nmax } => commands::eigs(&ctx, nmax),
        Command::Trace { nmax } => commands::trace(&ctx, nmax),
        Command::Forward => commands::forward(&ctx),
        Command::Faroperator { lambda } => commands::faroperator(&ctx, lambda),
        Command::Scan { data, gnuplot } => commands::scan(&ctx, data.as_deref(), gnuplot),
        Command::Peaks { input } => commands::peaks(&ctx, input.as_deref()),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
