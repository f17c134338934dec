use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the interpolation, solver and image stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("duplicate data sites {first} and {second} (distance {distance:e})")]
    DuplicateSites {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("GCR breakdown at iteration {iteration}: <Aw, Aw> = 0 with nonzero residual")]
    Breakdown { iteration: usize },

    #[error(
        "coarse operator is rank deficient: {columns} columns, pivot {pivot} ratio {ratio:e} below 1e-12"
    )]
    RankDeficient {
        columns: usize,
        pivot: usize,
        ratio: f64,
    },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
