//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative numerical routine failed to converge within its budget.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A sample is degenerate (pooled statistic T is zero), so no estimator
    /// of the scale function is defined for it.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// An observation lies below the location parameter it was declared
    /// to be drawn from.
    #[error(
        "inconsistent location in population {population}: \
         observation {value} < stated location {location}"
    )]
    InconsistentLocation {
        population: usize,
        value: f64,
        location: f64,
    },

    /// A combinatorial routine was asked for more work than it supports.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Sample CSV input could not be parsed.
    #[error("malformed sample CSV: {0}")]
    MalformedCsv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
