//! `sta-workbench`: batch sweeps and acceptance checks for the
//! counter-diabatic qubit workbench.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod csv;
mod plot;

use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sta_core::StaError;

use crate::config::RunConfig;
use crate::csv::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Core(#[from] StaError),
    #[error("{0} acceptance criteria failed")]
    CriteriaFailed(usize),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::CriteriaFailed(_) => 1,
            CliError::Config(_) | CliError::Core(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sta-workbench",
    version,
    about = "Counter-diabatic work-statistics workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also write an SVG line chart next to every CSV.
    #[arg(long, global = true)]
    plot: bool,
    /// Number of worker threads for sweeps.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Reference, counter-diabatic and total field components.
    Fields,
    /// Frozen-Hamiltonian Ramsey reconstruction of E±(τ_m).
    Eigenenergies,
    /// Frozen-population readout of P±|n(τ_m).
    Populations,
    /// First and second work moments against the adiabatic reference.
    Moments,
    /// Geometric-tensor comparison of the excess fluctuation.
    Qgt,
    /// Run every acceptance criterion and write verify_report.csv.
    Verify,
}

fn emit(tables: &[Table], dir: &Path, plot: bool) -> Result<(), CliError> {
    csv::ensure_dir(dir)?;
    for t in tables {
        let path = t.write(dir)?;
        println!("wrote {}", path.display());
        if plot {
            let svg = plot::write_svg(t, dir)?;
            println!("wrote {}", svg.display());
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let mut cfg = RunConfig::default();
            if let Some(dir) = std::env::var_os(config::OUTPUT_DIR_ENV) {
                cfg.output_dir = PathBuf::from(dir);
            }
            cfg
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        pool = pool.num_threads(n as usize);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;

    pool.install(|| {
        let tables = match cli.command {
            Command::Fields => commands::fields(&cfg)?,
            Command::Eigenenergies => commands::eigenenergies(&cfg)?,
            Command::Populations => commands::populations(&cfg)?,
            Command::Moments => commands::moments(&cfg)?,
            Command::Qgt => commands::qgt(&cfg)?,
            Command::Verify => {
                let (outcomes, report) = commands::verify(&cfg);
                for o in &outcomes {
                    println!("{o}");
                }
                emit(&[report], &cfg.output_dir, false)?;
                let failed = outcomes.iter().filter(|o| !o.passed()).count();
                println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
                return if failed == 0 {
                    Ok(())
                } else {
                    Err(CliError::CriteriaFailed(failed))
                };
            }
        };
        emit(&tables, &cfg.output_dir, cli.plot)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sta-workbench: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
