//! `spamtomo`: simultaneous state and readout-noise tomography on simulated
//! devices.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{cmd_calibrate, cmd_decode, cmd_run_example, cmd_scaling, CliError, CliResult};
use config::{ExperimentConfig, Mode};

#[derive(Parser)]
#[command(name = "spamtomo", version, about = "Simultaneous tomography of a quantum state and its readout noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel trials.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Decoder for `decode`, overriding the configuration.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the two-qubit worked example and check it against the golden values.
    RunExample,
    /// Decode one simulated instance and optionally fix the gauge.
    Decode,
    /// Sweep the noise strength or the smallest coefficient and fit the shot scaling.
    Scaling,
    /// Search for the smallest budget constant reaching the target success rate.
    Calibrate,
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(spamtomo::Error::Config {
                path: "--threads".into(),
                message: "at least one thread required".into(),
            }
            .into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(anyhow::Error::from)?;
    }
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(mode) = cli.mode {
        config.mode = mode;
    }
    if let Some(out) = &cli.out {
        config.out = out.display().to_string();
    }
    config.validate()?;
    let out = PathBuf::from(&config.out);
    match cli.command {
        Command::RunExample => cmd_run_example(&config, cli.out.as_deref()),
        Command::Decode => cmd_decode(&config, &out),
        Command::Scaling => cmd_scaling(&config, &out),
        Command::Calibrate => cmd_calibrate(&config, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Golden(list) = &e {
                for m in list {
                    eprintln!("  {m}");
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
