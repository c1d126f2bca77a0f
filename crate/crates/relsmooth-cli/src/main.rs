//! Batch experiment harness: load or construct problem instances, run
//! algorithm configurations across seeded replicates, and emit traces,
//! theoretical-bound overlays and verification reports as plain-text files.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "relsmooth",
    version,
    about = "Relative-smoothness optimization benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a config file
    Run { config: PathBuf },
    /// Tabulate theoretical bounds on each configured algorithm's grid
    Bounds { config: PathBuf },
    /// Run the verification suite for the configured problem
    Check { config: PathBuf },
    /// List built-in presets, or print one as a config file
    Presets {
        /// Print the expanded config of this preset
        #[arg(long)]
        show: Option<String>,
    },
}

fn load(config: &PathBuf) -> Result<(config::Experiment, String), config::ConfigError> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| config::ConfigError(format!("reading {}: {e}", config.display())))?;
    let dir = config
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    let exp = config::resolve(&text, &dir)?;
    Ok((exp, text))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Run { config } => load(config).and_then(|(exp, text)| {
            commands::cmd_run(&exp, &text)?;
            println!("wrote traces and manifest to {}", exp.output_dir.display());
            Ok(ExitCode::SUCCESS)
        }),
        Cmd::Bounds { config } => load(config).and_then(|(exp, _)| {
            commands::cmd_bounds(&exp)?;
            println!("wrote bound overlays to {}", exp.output_dir.display());
            Ok(ExitCode::SUCCESS)
        }),
        Cmd::Check { config } => load(config).and_then(|(exp, _)| {
            let all_pass = commands::cmd_check(&exp)?;
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                // Distinct from the config-error exit so scripts can tell a
                // failed certificate from a broken invocation.
                ExitCode::from(2)
            })
        }),
        Cmd::Presets { show } => commands::cmd_presets(show.as_deref()).map(|_| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
