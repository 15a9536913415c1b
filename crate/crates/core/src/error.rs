use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported interpolation degree {0} (expected one of 1, 3, 5)")]
    UnsupportedDegree(usize),
    #[error("unsupported Runge-Kutta order {0} (expected one of 1, 3, 5)")]
    UnsupportedErkOrder(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expected {expected} substeps, found {found}")]
    SubstepCount { expected: usize, found: usize },
    #[error("empty sequence")]
    EmptySequence,
    #[error("{n_t} time steps are not divisible by coarsening factor {m}")]
    NonDivisible { n_t: usize, m: usize },
    #[error("non-finite value in right-hand side")]
    NonFinite,
    #[error("gap normalization degenerate")]
    GapDegenerate,
    #[error("order fit: {0}")]
    OrderFit(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
