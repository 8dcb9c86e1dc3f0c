//! Command implementations behind the `stepopt` binary.
//!
//! Every command takes a fully merged [`RunConfig`] and returns the rendered
//! output as a string, so the binary only decides where the bytes go.

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

use std::path::PathBuf;
use thiserror::Error;

pub use config::{Format, Preset, RunConfig, SweepSpec, SweepVar};

/// Names the default output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "STEPOPT_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Pricing(#[from] stepopt::PricingError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Short machine-readable class for the diagnostic stream.
    pub fn class(&self) -> &'static str {
        use stepopt::PricingError as P;
        match self {
            CliError::Pricing(P::Parameter { .. }) => "parameter",
            CliError::Pricing(P::UnsupportedRegion(_)) => "unsupported_region",
            CliError::Pricing(P::NoBoundState(_)) => "no_bound_state",
            CliError::Pricing(P::ApproximationDomain(_)) => "approximation_domain",
            CliError::Pricing(P::Contract(_)) => "contract",
            CliError::Pricing(P::Divergence(_)) => "divergence",
            CliError::Pricing(P::Quadrature { .. }) => "quadrature",
            CliError::Pricing(P::Internal(_)) => "internal",
            CliError::Config(_) => "config",
            CliError::Output(_) => "output",
            CliError::Io(_) => "io",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Price,
    Sweep,
    Table1,
    Table2,
    Validate,
    Greeks,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Price => "price",
            Command::Sweep => "sweep",
            Command::Table1 => "table1",
            Command::Table2 => "table2",
            Command::Validate => "validate",
            Command::Greeks => "greeks",
        }
    }
}

/// Rendered output plus whether the command's checks passed.
pub struct Outcome {
    pub text: String,
    pub success: bool,
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ok = |text| Outcome { text, success: true };
    match command {
        Command::Price => commands::cmd_price(cfg).map(ok),
        Command::Sweep => commands::cmd_sweep(cfg).map(ok),
        Command::Greeks => commands::cmd_greeks(cfg).map(ok),
        Command::Table1 => commands::cmd_table1(cfg).map(ok),
        Command::Table2 => commands::cmd_table2(cfg).map(ok),
        Command::Validate => {
            // The report is always JSON.
            let (text, success) = validate::cmd_validate(cfg)?;
            Ok(Outcome { text, success })
        }
    }
}

/// `--out`, else `$STEPOPT_OUT_DIR/<command>.<ext>`, else standard output.
pub fn destination(command: Command, cfg: &RunConfig, env_dir: Option<PathBuf>) -> Option<PathBuf> {
    if let Some(p) = &cfg.out {
        return Some(p.clone());
    }
    let ext = if command == Command::Validate {
        "json"
    } else {
        cfg.format.extension()
    };
    env_dir.map(|d| d.join(format!("{}.{ext}", command.as_str())))
}
