// Validation guards use `!(x > 0.0)` so NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! `qdsld` — batch front end for the QDSLD simulator.
//!
//! Usage: `qdsld <scenario> --config <path> [--out <dir>] [--threads N]`.
//! Exit codes: 0 success, 2 config error, 3 solver error, 4 I/O error.
//! On failure a machine-readable error JSON is printed to stdout.

mod config;
mod ingest;
mod output;
mod scenarios;

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliErrorKind {
    Config,
    Solver,
    Io,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: CliErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: CliErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            kind: CliErrorKind::Io,
            message: message.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self.kind {
            CliErrorKind::Config => 2,
            CliErrorKind::Solver => 3,
            CliErrorKind::Io => 4,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self.kind {
            CliErrorKind::Config => "config",
            CliErrorKind::Solver => "solver",
            CliErrorKind::Io => "io",
        }
    }
}

impl From<qdsld_core::Error> for CliError {
    fn from(e: qdsld_core::Error) -> Self {
        Self {
            kind: CliErrorKind::Solver,
            message: e.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "qdsld",
    about = "Stationary photon numbers, thresholds, emission spectra and spectral fits \
             of broadband quantum-dot superluminescent diodes",
    version
)]
struct Cli {
    /// Scenario to run; must match the `scenario` key of the config.
    #[arg(value_enum)]
    scenario: config::Scenario,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for result.json / curve.tsv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweep grids (default: all cores). Outputs are
    /// identical regardless of thread count.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = config::load_config(&cli.config)?;
    if config.scenario != cli.scenario {
        return Err(CliError::config(format!(
            "scenario mismatch: command line says {}, config says {}",
            cli.scenario, config.scenario
        )));
    }
    scenarios::run(&config, &cli.out, cli.threads)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc = serde_json::json!({
                "error": { "kind": e.kind_name(), "message": e.message }
            });
            println!("{doc}");
            ExitCode::from(e.exit_code())
        }
    }
}
