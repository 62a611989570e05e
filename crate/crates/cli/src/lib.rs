//! Library surface of the sweep tool: configuration parsing, sweep and
//! distance computation, CSV formatting. The `skc` binary is a thin driver
//! over these modules.

pub mod config;
pub mod csvfmt;
pub mod sweep;

/// Failure classes, mapped one-to-one onto process exit codes:
/// configuration 1, numerical 2, validation 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Validation(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Validation(m) => m,
        }
    }
}
