//! Experiment runner for `mgrit-advect`: single solves, iteration-count
//! tables, Fourier convergence curves and verification batteries.

pub mod cli;
pub mod config;
pub mod lfa;
pub mod run;
pub mod table;
pub mod verify;

use std::fmt;

/// Bad input from the user; maps to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Exit code for an error returned by [`cli::dispatch`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err
        .chain()
        .any(|e| e.downcast_ref::<UsageError>().is_some())
    {
        EXIT_USAGE
    } else {
        EXIT_INTERNAL
    }
}
