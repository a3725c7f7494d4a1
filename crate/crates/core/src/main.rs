use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eqdist::config::{validate, Experiment, ExperimentConfig};
use eqdist::runner::{run_in, threads_from_env};

#[derive(Parser)]
#[command(name = "eqdist", version, about = "Equilibrium-measure experiments for weighted random polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Overrides the `output` key.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a config file and print diagnostics.
    Validate { config: PathBuf },
    /// List the available experiments.
    ListExperiments,
}

fn read(path: &PathBuf) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<10} {}", e.name(), e.describe());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => {
            let text = match read(&config) {
                Ok(t) => t,
                Err(c) => return c,
            };
            let diags = validate(&text);
            for d in &diags {
                println!("{}: {d}", config.display());
            }
            if diags.is_empty() {
                println!("{}: ok", config.display());
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Run { config, output } => {
            let text = match read(&config) {
                Ok(t) => t,
                Err(c) => return c,
            };
            let cfg = match ExperimentConfig::from_text(&text) {
                Ok(c) => c,
                Err(diags) => {
                    for d in diags {
                        eprintln!("{}: {d}", config.display());
                    }
                    return ExitCode::from(2);
                }
            };
            let threads = match threads_from_env() {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let out = output.unwrap_or_else(|| cfg.output.clone());
            match run_in(&cfg, &out, threads) {
                Ok(o) => {
                    for f in &o.files {
                        println!("{}", o.output.join(f).display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
