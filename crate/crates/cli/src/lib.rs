//! Library half of the `noneq` binary: config handling, CSV I/O, the
//! scenario commands and the selftest, kept linkable so integration tests
//! can drive them directly.

pub mod commands;
pub mod config;
pub mod io;
pub mod selftest;

/// Exit code for validation failures (bad flags, config, input files).
pub const EXIT_VALIDATION: i32 = 1;
/// Exit code for computation failures (divergence, accuracy, sampling...).
pub const EXIT_COMPUTE: i32 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<noneq_core::Error> for CliError {
    fn from(e: noneq_core::Error) -> Self {
        CliError {
            code: if e.is_input_error() { EXIT_VALIDATION } else { EXIT_COMPUTE },
            message: e.to_string(),
        }
    }
}

pub fn fail_input(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_VALIDATION, message: message.into() }
}

pub fn fail_compute(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_COMPUTE, message: message.into() }
}
