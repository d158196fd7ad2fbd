//! Config-driven runner for profile sweeps, ratio minimisation and
//! hypothesis verification.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 a checked
//! hypothesis failed, 3 I/O error.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use config::{ConfigError, ToleranceOverrides};

/// Environment variable naming the default directory for data files.
pub const OUT_DIR_ENV: &str = "ISORATIO_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Usage = 1,
    Hypothesis = 2,
    Io = 3,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("computation failed: {0}")]
    Numerics(String),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Config(ConfigError::Read { .. }) | CliError::Io { .. } => Exit::Io,
            CliError::Config(_) | CliError::Usage(_) => Exit::Usage,
            CliError::Numerics(_) => Exit::Hypothesis,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "isoratio",
    version,
    about = "Isoperimetric profiles and ratios on surfaces of revolution"
)]
pub struct Cli {
    /// Relative quadrature tolerance, overriding the config.
    #[arg(long, global = true)]
    pub tol_quadrature: Option<f64>,
    /// Minimisation tolerance, overriding the config.
    #[arg(long, global = true)]
    pub tol_minimize: Option<f64>,
    /// Output file: the CSV table for `sweep`, the report otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Iflat,
    Istar,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Total volume, curvature samples and the structural conditions.
    Describe { config: PathBuf },
    /// Tabulate profile and ratios over a volume grid.
    Sweep {
        config: PathBuf,
        /// Number of midpoint volumes in ]0, A[.
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// Explicit volumes as fractions of A; replaces the grid.
        #[arg(long = "at-fraction")]
        at_fraction: Vec<f64>,
    },
    /// Global minimiser of a ratio with its certificate.
    Minimize {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Which::Iflat)]
        which: Which,
    },
    /// Conditions, small-volume constant, minimiser and orderings.
    Verify { config: PathBuf },
    /// Random search for violations of the split inequalities.
    Lemmas {
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Allow exponents other than 1 and 2.
        #[arg(long)]
        conjecture: bool,
    },
}

impl Cli {
    fn tolerance_overrides(&self) -> ToleranceOverrides {
        ToleranceOverrides {
            quadrature: self.tol_quadrature,
            minimize: self.tol_minimize,
            ..Default::default()
        }
    }
}

/// Parse `args`, run the command and return the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return Exit::Usage as i32;
            }
            let _ = write!(stdout, "{}", e.render());
            return Exit::Ok as i32;
        }
    };
    match commands::execute(&cli) {
        Ok(outcome) => {
            let emitted = match (&cli.out, &cli.command) {
                (Some(path), cmd) if !matches!(cmd, Command::Sweep { .. }) => std::fs::write(path, &outcome.report)
                    .map_err(|source| CliError::Io {
                        path: path.display().to_string(),
                        source,
                    }),
                _ => stdout
                    .write_all(outcome.report.as_bytes())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    }),
            };
            match emitted {
                Ok(()) => outcome.exit as i32,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    e.exit() as i32
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit() as i32
        }
    }
}
