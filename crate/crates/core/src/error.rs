use std::path::PathBuf;

use crate::grid::Scaling;

/// Errors raised by the solver and its checkers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid ammunition function: {0}")]
    InvalidAmmo(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("scaling mismatch: expected {expected:?} field, got {found:?}")]
    Scaling { expected: Scaling, found: Scaling },

    #[error(
        "sandwich order violated at iteration {iteration}, node ({i}, {j}): lower exceeds upper by {excess:e}"
    )]
    SandwichOrder {
        iteration: usize,
        i: usize,
        j: usize,
        excess: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
