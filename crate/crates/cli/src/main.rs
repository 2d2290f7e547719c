use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracwave_cli::config::RawConfig;
use fracwave_cli::experiments::{execute, prepare};
use fracwave_cli::{plot, CliError, Result, OUTPUT_DIR_ENV, THREADS_ENV};

/// Damped fractional wave experiments.
#[derive(Parser)]
#[command(name = "fracwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Print a CSV series from an artifact directory.
    Plot {
        dir: PathBuf,
        /// energy, residuals or snapshot
        series: String,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Time level of a snapshot (default: last).
        #[arg(long)]
        time_index: Option<usize>,
    },
    /// Parse a config and check its preconditions without solving.
    Validate { config: PathBuf },
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "{THREADS_ENV} must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure {n} threads: {e}")))
}

fn output_override() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

fn dispatch(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Run { config } => {
            let plan = prepare(&RawConfig::load(&config)?, output_override())?;
            let dir = plan.output_dir.clone();
            let manifest = execute(plan)?;
            println!(
                "{}: wrote {} files to {}",
                manifest.experiment,
                manifest.files.len(),
                dir.display()
            );
        }
        Command::Plot {
            dir,
            series,
            out,
            time_index,
        } => {
            let csv = plot::emit(&dir, &series, time_index)?;
            match out {
                Some(path) => std::fs::write(&path, csv).map_err(|e| {
                    CliError::Config(format!("cannot write {}: {e}", path.display()))
                })?,
                None => print!("{csv}"),
            }
        }
        Command::Validate { config } => {
            let plan = prepare(&RawConfig::load(&config)?, output_override())?;
            println!("{}: configuration is valid", plan.kind);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
