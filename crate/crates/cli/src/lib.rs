//! Command-line front end for `qpt-core`.
//!
//! Every subcommand writes one table, CSV by default or JSON Lines, headed by
//! the toolkit version and the fully resolved configuration.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::Report;

#[derive(Debug, Parser)]
#[command(
    name = "qpt",
    version,
    about = "Quantum phase transitions of a BEC on an interval"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Config file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output file (default: stdout).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Override one config key; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Laplacian eigenvalues and quartic overlaps for k = 1..k_max.
    Spectrum,
    /// Critical points beta_k for k = 1..k_max.
    CriticalPoints,
    /// Continued branches over [beta_min, beta_max].
    Diagram,
    /// Count the distinct nontrivial states at one beta.
    #[command(allow_negative_numbers = true)]
    Census {
        /// Shorthand for `--set beta=VALUE`.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Time evolution with conservation diagnostics.
    Evolve,
}

impl Cli {
    /// Defaults, then the config file, then `--set`, then dedicated flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        for s in &self.set {
            c.apply_override(s)?;
        }
        if let Command::Census { beta: Some(beta) } = self.command {
            c.set("beta", &beta.to_string())?;
        }
        if let Some(f) = self.format {
            c.format = f;
        }
        if let Some(out) = &self.out {
            c.out = Some(out.clone());
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit(report: &Report, c: &RunConfig) -> Result<(), CliError> {
    match &c.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            report.write(c.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            report.write(c.format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = cli.resolve().and_then(|c| {
        let (report, outcome) = match cli.command {
            Command::Spectrum => commands::spectrum(&c)?,
            Command::CriticalPoints => commands::critical_points(&c)?,
            Command::Diagram => commands::diagram(&c)?,
            Command::Census { .. } => commands::census(&c)?,
            Command::Evolve => commands::evolve_cmd(&c)?,
        };
        emit(&report, &c)?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            match &outcome {
                Outcome::Shortfall => {
                    eprintln!("qpt: census shortfall: fewer states found than the lower bound")
                }
                Outcome::Failed(msgs) => {
                    for m in msgs {
                        eprintln!("qpt: {m}");
                    }
                }
                Outcome::Success => {}
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("qpt: error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (program name first) and runs.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
