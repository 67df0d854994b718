//! Command-line front end: `classify`, `construct`, `orbit` and `periodic`.
//!
//! Exit codes: 0 when every budget is met, 2 on a budget violation, 3 when a
//! hypothesis of the construction fails, 4 on configuration errors and 1 on
//! internal errors.

use std::ffi::OsString;
use std::fs;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::classify::ClassifyError;
use crate::fhc::FhcError;
use crate::weights::WeightError;

mod commands;
pub mod config;
pub mod report;

pub use config::{Flags, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "fhc-lab", version, about = "Translation semigroups on weighted spaces over [0, inf)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dynamical verdicts for a weight and space.
    Classify(Flags),
    /// Build a frequently hypercyclic vector and verify its return bounds.
    Construct(Flags),
    /// Scan orbit hit densities of a constructed vector.
    Orbit(Flags),
    /// Build a truncated periodic point.
    Periodic(Flags),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Hypothesis(_) => EXIT_HYPOTHESIS,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<WeightError> for CliError {
    fn from(e: WeightError) -> Self {
        match e {
            WeightError::NotAdmissible(_) => CliError::Hypothesis(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<FhcError> for CliError {
    fn from(e: FhcError) -> Self {
        match e {
            FhcError::Hypothesis(m) => CliError::Hypothesis(m),
            FhcError::Weight(w) => w.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::NotAdmissible { .. } => CliError::Hypothesis(e.to_string()),
            ClassifyError::Inconsistent(_) => CliError::Internal(e.to_string()),
            ClassifyError::Weight(w) => w.into(),
        }
    }
}

/// Report text and whether every budget was met.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: String,
    pub budgets_met: bool,
}

pub fn execute(command: &Command) -> Result<(Outcome, RunConfig), CliError> {
    let (name, flags, defaults) = match command {
        Command::Classify(f) => ("classify", f, commands::CLASSIFY_DEFAULTS),
        Command::Construct(f) => ("construct", f, commands::CONSTRUCT_DEFAULTS),
        Command::Orbit(f) => ("orbit", f, commands::ORBIT_DEFAULTS),
        Command::Periodic(f) => ("periodic", f, commands::PERIODIC_DEFAULTS),
    };
    let cfg = RunConfig::resolve(name, flags, defaults)?;
    let outcome = match command {
        Command::Classify(_) => commands::classify(&cfg)?,
        Command::Construct(_) => commands::construct(&cfg)?,
        Command::Orbit(_) => commands::orbit(&cfg)?,
        Command::Periodic(_) => commands::periodic(&cfg)?,
    };
    Ok((outcome, cfg))
}

/// Parses arguments, runs the command, writes the report and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok((outcome, cfg)) => {
            match &cfg.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, &outcome.report) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return EXIT_CONFIG;
                    }
                }
                None => print!("{}", outcome.report),
            }
            if outcome.budgets_met {
                EXIT_OK
            } else {
                eprintln!("budget violation; see the report");
                EXIT_BUDGET
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
