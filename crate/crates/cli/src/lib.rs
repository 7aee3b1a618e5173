//! Command-line front end for planning, compiling and simulating qunit
//! navigation with Householder reflections.

pub mod args;
pub mod commands;
pub mod formats;

use std::path::Path;

use qhr_core::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error as ThisError;

pub use args::{Cli, Command};
pub use commands::run;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_INTEGRATOR: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}\nhint: the states are not unitarily connected; try `qhr plan synthesize`")]
    Invariant(String),
    #[error("{0}")]
    Integrator(String),
    #[error("{0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => EXIT_INPUT,
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Integrator(_) => EXIT_INTEGRATOR,
            CliError::Verify(_) => EXIT_VERIFY,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvariantMismatch { .. } => CliError::Invariant(msg),
            Error::Integrator { .. } | Error::AncillaLeakage { .. } | Error::Numeric(_) => CliError::Integrator(msg),
            _ => CliError::Parse(msg),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
