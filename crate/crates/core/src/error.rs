use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("overflow: {0}")]
    Overflow(String),

    #[error("field has zero norm; subgradient is the whole unit ball")]
    ZeroField,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too coarse: n = {0}, need n >= 3")]
    TooCoarse(usize),

    #[error("linear solver diverged after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("measure support error: {0}")]
    SupportError(String),

    #[error("measure is not admissible: {0}")]
    NotAdmissible(String),

    #[error("no convergence after {iterations} iterations (last update {last_update:e})")]
    NoConvergence { iterations: usize, last_update: f64 },

    #[error("test function does not vanish on the boundary (max |ζ| = {0:e})")]
    TestNotAdmissible(f64),

    #[error("measures are not ordered: {0}")]
    NotComparable(String),

    #[error("infeasible capacity problem: {0}")]
    Infeasible(String),

    #[error("level must be positive, got {0}")]
    BadLambda(f64),

    #[error("ladder too coarse: {0}")]
    LadderTooCoarse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
