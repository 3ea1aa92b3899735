//! Benchmark harness comparing AMG setup reuse strategies over a sequence
//! of linear systems.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

pub mod config;
pub mod report;
pub mod runner;

pub use config::{BenchConfig, Cli, OutputFormat, Preset, Source};
pub use report::{read_steps_csv, render_report, write_steps_csv, StepRecord};
pub use runner::{comparison_rows, load_systems, phase_shares, run, run_benchmark, BenchOutcome, ComparisonRow, PhaseShares};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    /// Failure while reading, generating or writing the problem.
    #[error(transparent)]
    Load(amg_reuse::Error),
    /// Failure inside the solver pipeline.
    #[error("benchmark failed: {0}")]
    Run(amg_reuse::Error),
    #[error("{0}")]
    Internal(String),
}

impl BenchError {
    /// 1 for configuration and I/O problems, 2 for internal failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Config(_) | BenchError::Io { .. } | BenchError::Load(_) => 1,
            BenchError::Run(_) | BenchError::Internal(_) => 2,
        }
    }
}

fn create(path: &PathBuf) -> Result<File, BenchError> {
    File::create(path).map_err(|source| BenchError::Io {
        path: path.clone(),
        source,
    })
}

/// Runs the benchmark described by parsed command-line arguments and
/// writes every requested output.
pub fn run_cli(cli: Cli) -> Result<(), BenchError> {
    let config = BenchConfig::from_cli(cli)?;
    let outcome = run(&config)?;
    let text = render_report(&config, &outcome).map_err(|e| BenchError::Internal(e.to_string()))?;
    match &config.output {
        Some(path) => create(path)?
            .write_all(text.as_bytes())
            .map_err(|source| BenchError::Io { path: path.clone(), source })?,
        None => {
            let _ = io::stdout().write_all(text.as_bytes());
        }
    }
    if let Some(path) = &config.steps_csv {
        write_steps_csv(create(path)?, &outcome).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => BenchError::Io { path: path.clone(), source },
            other => BenchError::Internal(format!("{other:?}")),
        })?;
    }
    Ok(())
}
