//! Command-line driver for the chernlab checks, flows and acceptance suite.

pub mod commands;
pub mod config;
pub mod report;
pub mod suite;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use commands::CheckKind;
use config::{ConfigError, RunArgs, RunConfig};
use report::Report;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "chernlab",
    version,
    about = "Numerical checks of Hermitian geometry and the Hermitian curvature flow"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub args: RunArgs,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run one residual battery over seeded points.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
    },
    /// Sample loops and estimate the fixed subspace of the twisted holonomy.
    Holonomy,
    /// Integrate the flow on a Lie group with a left-invariant metric.
    Flow,
    /// Compare the null space of ρ with the normalizer on a quotient.
    Submersion,
    /// Run the acceptance suite.
    Verify {
        #[arg(value_enum)]
        target: VerifyTarget,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyTarget {
    All,
}

pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Report, ConfigError> {
    match command {
        Command::Check { kind } => commands::check(*kind, cfg),
        Command::Holonomy => commands::holonomy(cfg),
        Command::Flow => commands::flow(cfg),
        Command::Submersion => commands::submersion(cfg),
        Command::Verify {
            target: VerifyTarget::All,
        } => commands::verify_all(cfg),
    }
}

fn emit(report: &Report, cfg: &RunConfig) -> Result<(), ConfigError> {
    let text = report.render(cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| ConfigError::Io {
            path: path.clone(),
            message: e.to_string(),
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| ConfigError::Invalid(e.to_string()))
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let start = Instant::now();
    let outcome = cli.args.resolve().and_then(|cfg| {
        let report = execute(&cli.command, &cfg)?;
        emit(&report, &cfg)?;
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            let failed: Vec<&str> = report
                .records
                .iter()
                .filter(|r| !r.passed())
                .map(|r| r.name.as_str())
                .collect();
            eprintln!(
                "{}: {} records, {} failed, {:.2} s",
                report.command,
                report.records.len(),
                failed.len(),
                start.elapsed().as_secs_f64()
            );
            for name in &failed {
                eprintln!("  FAIL {name}");
            }
            if report.passed {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
