use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use holomimo::config::ExperimentConfig;
use holomimo::experiment;

#[derive(Parser)]
#[command(name = "holomimo", version, about = "Metasurface antenna design and uplink massive-MIMO Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Euclidean-mapped element table for every surface.
    Design(Common),
    /// Patterns, S-parameter sweeps and per-surface power budgets.
    AntennaReport(Common),
    /// Paired metasurface and Rayleigh channel ensemble.
    Mc(Common),
    /// Mean capacity and condition number over elements x angular spread.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration; defaults apply to anything it omits.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Realizations per ensemble (per cell for `sweep`), overriding the configuration.
    #[arg(long)]
    realizations: Option<usize>,
}

impl Common {
    fn load(&self, sweep: bool) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_path(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(n) = self.realizations {
            if sweep {
                cfg.run.sweep_realizations = n;
            } else {
                cfg.run.realizations = n;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (common, sweep) = match &cli.command {
        Command::Sweep(c) => (c, true),
        Command::Design(c) | Command::AntennaReport(c) | Command::Mc(c) => (c, false),
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the worker pool")?;
    }
    let cfg = common.load(sweep)?;
    let out = &common.out;
    let written = match &cli.command {
        Command::Design(_) => experiment::cmd_design(&cfg, out),
        Command::AntennaReport(_) => experiment::cmd_antenna_report(&cfg, out),
        Command::Mc(_) => experiment::cmd_mc(&cfg, out),
        Command::Sweep(_) => experiment::cmd_sweep(&cfg, out),
    }?;
    for p in written {
        log::info!("wrote {}", p.display());
    }
    Ok(())
}
