use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error)]
pub enum GcmError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stationary point check failed: {0}")]
    StationaryPoint(String),

    #[error("matrix assembly produced a non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("eigensolver failed on a {dimension}x{dimension} block (max |entry| = {max_entry:e})")]
    Eigensolver { dimension: usize, max_entry: f64 },

    #[error("level {index} is outside the converged range (n_converged = {n_converged})")]
    LevelNotConverged { index: usize, n_converged: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("trajectory left the representable phase-space box at t = {time}")]
    Escape { time: f64 },

    #[error("relative energy drift {drift:e} exceeds tolerance {tolerance:e}")]
    EnergyDrift { drift: f64, tolerance: f64 },

    #[error("section crossing refinement did not converge (|y| = {residual:e})")]
    CrossingRefinement { residual: f64 },

    #[error("energy {energy} lies below the potential minimum {minimum}")]
    EnergyBelowMinimum { energy: f64, minimum: f64 },

    #[error("too few levels: need {needed}, have {have}")]
    TooFewLevels { needed: usize, have: usize },

    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, GcmError>;
