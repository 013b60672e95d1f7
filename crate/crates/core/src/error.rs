use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("{name} = {value} is outside the allowed domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid photon-number distribution: {0}")]
    InvalidDistribution(String),

    #[error("g2 undefined for vacuum")]
    G2UndefinedForVacuum,

    #[error("classical optimum undefined for g2 = 0, use nonclassical branch")]
    ClassicalOptimumUndefined,

    #[error("objective is not finite at x = {x} (value {value})")]
    NonFinite { x: f64, value: f64 },

    /// The refined maximum fell below the best pre-scan sample, meaning the
    /// objective was not unimodal on the bracket.
    #[error(
        "unimodality check failed: grid maximum {grid_value} at x = {grid_x}, \
         refined {refined_value} at x = {refined_x}"
    )]
    Unimodality {
        grid_x: f64,
        grid_value: f64,
        refined_x: f64,
        refined_value: f64,
    },

    #[error("degenerate baseline: Poissonian optimum {0} is not positive")]
    DegenerateBaseline(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Checks `lo <= value <= hi`, rejecting NaN.
pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    domain: &'static str,
) -> Result<f64> {
    if value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            domain,
        })
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    check_range(name, value, 0.0, 1.0, "[0, 1]")
}
