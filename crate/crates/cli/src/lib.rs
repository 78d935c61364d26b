//! Experiment runner for the LWPA performance models: configuration
//! parsing, parameter sweeps, figure presets and CSV output.

pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;

use std::fmt;
use std::io;

use config::ConfigError;
use presets::FigureOutput;
use sweep::{CellStatus, SweepResult};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "LWPA_OUTPUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Config(Vec<ConfigError>),
    Usage(String),
    Numerical(String),
    Statistical(String),
    Io(io::Error),
}

impl CliError {
    /// Process exit status: 1 configuration, 2 numerical, 3 statistical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Statistical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(errors) => {
                writeln!(f, "invalid configuration:")?;
                for e in errors {
                    writeln!(f, "  {e}")?;
                }
                Ok(())
            }
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Statistical(m) => write!(f, "statistical failure: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<lwpa_core::Error> for CliError {
    fn from(e: lwpa_core::Error) -> Self {
        match e {
            lwpa_core::Error::InvalidParameter { field, reason } => CliError::Config(vec![ConfigError {
                path: field.to_string(),
                message: reason,
            }]),
            lwpa_core::Error::Statistical(_) => CliError::Statistical(e.to_string()),
            lwpa_core::Error::Quadrature(_) | lwpa_core::Error::DivisionByZero(_) => CliError::Numerical(e.to_string()),
        }
    }
}

/// The error that decides the exit status of a completed sweep: numerical
/// failures first, then statistical ones.
pub fn sweep_failure(result: &SweepResult) -> Option<CliError> {
    let mut statistical = None;
    for row in &result.rows {
        match &row.status {
            CellStatus::Numerical(m) => return Some(CliError::Numerical(m.clone())),
            CellStatus::InvalidInput(m) => return Some(CliError::Usage(m.clone())),
            CellStatus::Statistical(m) if statistical.is_none() => statistical = Some(CliError::Statistical(m.clone())),
            _ => {}
        }
    }
    statistical
}

pub fn figure_failure(output: &FigureOutput) -> Option<CliError> {
    match output {
        FigureOutput::Sweep(r) => sweep_failure(r),
        FigureOutput::Density(t) => t.rows.iter().find_map(|r| match &r.mc {
            Some(Err(e)) => Some(CliError::from(e.clone())),
            _ => None,
        }),
    }
}

/// Writes either kind of figure output as CSV.
pub fn write_figure_csv<W: io::Write>(out: W, output: &FigureOutput) -> io::Result<()> {
    match output {
        FigureOutput::Density(t) => output::write_density_csv(out, t),
        FigureOutput::Sweep(r) => output::write_sweep_csv(out, r),
    }
}
