//! `cfx` command-line driver: argument handling, error-to-exit-code mapping
//! and dispatch to the subcommands in [`commands`].

pub mod commands;
pub mod config;
pub mod output;

use std::path::Path;

use thiserror::Error;

use cfx_core::analysis::AnalysisError;
use cfx_core::lagrange::LagrangeError;
use cfx_core::systems::SystemError;
use cfx_core::CfError;

use config::{Cli, Command, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Config(String),
    #[error("no result: {0}")]
    NonTermination(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Config(_) => 3,
            CliError::NonTermination(_) => 4,
        }
    }
}

impl From<SystemError> for CliError {
    fn from(e: SystemError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<CfError> for CliError {
    fn from(e: CfError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<LagrangeError> for CliError {
    fn from(e: LagrangeError) -> Self {
        match e {
            LagrangeError::Parse(_) => CliError::Parse(e.to_string()),
            LagrangeError::NoPeriodWithinBound(_) | LagrangeError::DegenerateQuadratic(_) => {
                CliError::NonTermination(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Reads a saved configuration: either a `.meta.json` sidecar (its `config`
/// member) or a bare [`RunConfig`].
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Systems => {
            commands::list_systems();
            Ok(())
        }
        Command::Replay(ref args) => {
            let cfg = load_config(&args.path)?;
            execute(&cfg)
        }
        _ => execute(&RunConfig::from_cli(cli)),
    }
}

pub fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    if let Some(n) = cfg.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        // A pool built earlier in the same process is kept; only the first call wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let report = commands::dispatch(cfg)?;
    report.emit(cfg)
}
