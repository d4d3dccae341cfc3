use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phonon_cli::{load_config, parse_values, run_to_dir, sweep, CliError, CliResult, ExperimentConfig};

/// Simulator for phonon-mediated quantum state transfer experiments.
#[derive(Parser)]
#[command(name = "phonon-sim", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and write a result bundle.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment once per value of a scalar config parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Dotted path of the parameter, e.g. `interference.delta_phi`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Parse and validate a config without running it.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Print the default config.
    Defaults {
        /// Experiment id to put in the emitted config.
        #[arg(long, default_value = "ping_pong")]
        experiment: String,
    },
}

fn set_jobs(jobs: Option<usize>) -> CliResult<()> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Validation("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    Ok(())
}

fn main_inner(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Cmd::Run { common, out } => {
            set_jobs(common.jobs)?;
            let cfg = load_config(&common.config, common.seed)?;
            run_to_dir(&cfg, &out)?;
            println!("{}", out.display());
        }
        Cmd::Sweep { common, out, param, values } => {
            set_jobs(common.jobs)?;
            let cfg = load_config(&common.config, common.seed)?;
            let values = parse_values(&values)?;
            sweep(&cfg, &param, &values, &out)?;
            println!("{}", out.join("summary.csv").display());
        }
        Cmd::Validate { common } => {
            let cfg = load_config(&common.config, common.seed)?;
            println!("ok: {}", cfg.experiment.name());
        }
        Cmd::Defaults { experiment } => {
            let cfg = ExperimentConfig::from_toml(&format!("experiment = \"{experiment}\""))?;
            print!("{}", cfg.to_toml()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
