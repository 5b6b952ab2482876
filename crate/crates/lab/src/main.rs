use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tlsim_lab::{ExperimentConfig, LabError};

#[derive(Parser)]
#[command(name = "tlsim", version, about = "Two-level systems in a quantized mode beyond the rotating-wave approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV tables plus manifest.toml.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. `--set g=0.3`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Check a config and print dimension, memory and runtime estimates.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), LabError> {
    match cmd {
        Command::Run { config, set } => {
            let cfg = ExperimentConfig::load(&config, &set)?;
            let report = tlsim_lab::run(&cfg)?;
            for note in &report.notes {
                println!("note: {note}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Validate { config, set } => {
            let cfg = ExperimentConfig::load(&config, &set)?;
            let est = tlsim_lab::validate(&cfg)?;
            println!("experiment = {}", cfg.experiment);
            println!("dimension = {}", est.dimension);
            println!("memory_bytes = {}", est.memory_bytes);
            println!("runtime = {}", est.runtime_class);
            println!("ok");
        }
    }
    Ok(())
}
