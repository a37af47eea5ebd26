//! Command-line front end for the joint-detection-receiver simulation.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "jdr",
    version,
    about = "Joint detection receiver simulation: transducer channel, qubit states, decoder training, sweeps and capacities"
)]
struct Cli {
    /// TOML experiment config; defaults used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a config key (dotted path or alias), e.g. --set codebook.n=4
    /// or --set temperature=1.0. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output path (CSV table, or TOML model for `train`).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Root seed; shorthand for --set experiment.seed=N.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transduction channel parameters (eta_tr, nbar_tr, ...) per temperature.
    Channel,
    /// Transduced qubit Bloch vectors, optimal interaction time and trace
    /// distance at the configured RMPN.
    Qubits,
    /// Train one decoder and persist the model artifact.
    Train,
    /// Error-probability sweep over the RMPN grid, temperatures and depths.
    Sweep,
    /// Capacity curves: C1, optical Holevo, ideal and transduced JDR.
    Capacity,
    /// Noise robustness: noise-free training re-evaluated under the noise
    /// block.
    Noise,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Channel => "channel",
            Command::Qubits => "qubits",
            Command::Train => "train",
            Command::Sweep => "sweep",
            Command::Capacity => "capacity",
            Command::Noise => "noise",
        }
    }

    fn default_out(&self) -> PathBuf {
        match self {
            Command::Train => PathBuf::from("model.toml"),
            other => PathBuf::from(format!("{}.csv", other.name())),
        }
    }
}

/// Exit 2: bad flags/config. Exit 1: failure while computing or writing.
enum CliError {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = config::load(cli.config.as_deref(), &cli.set, cli.seed).map_err(CliError::Usage)?;
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| cli.command.default_out());
    let result: Result<()> = match cli.command {
        Command::Channel => commands::channel(&config, &out),
        Command::Qubits => commands::qubits(&config, &out),
        Command::Train => commands::train(&config, &out),
        Command::Sweep => commands::sweep(&config, &out),
        Command::Capacity => commands::capacity(&config, &out),
        Command::Noise => commands::noise(&config, &out),
    };
    result.map_err(CliError::Runtime)
}

fn main() -> ExitCode {
    // Unknown flags/subcommands exit 2 via clap's default error handling.
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: cannot configure {jobs} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
