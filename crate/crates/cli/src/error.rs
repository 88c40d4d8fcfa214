//! Error classification for the process exit code: validation problems
//! (bad flags, malformed files, impossible requests) exit 1, numerical
//! failures during estimation exit 2.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn io(context: &str, err: std::io::Error) -> Self {
        CliError::Validation(format!("{context}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Numerical(msg) => f.write_str(msg),
        }
    }
}

impl From<panelgarch::Error> for CliError {
    fn from(err: panelgarch::Error) -> Self {
        use panelgarch::Error as E;
        match err {
            E::InvalidOrders(_)
            | E::InvalidParams(_)
            | E::DimensionMismatch { .. }
            | E::InsufficientData(_)
            | E::DegenerateUnit { .. } => CliError::Validation(err.to_string()),
            E::NonFinite(_) | E::FitFailure { .. } | E::SingularMatrix { .. } => {
                CliError::Numerical(err.to_string())
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
