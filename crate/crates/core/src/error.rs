use thiserror::Error;

use crate::mps::TraceRow;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Physically or numerically inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Coupling sits on the pole of the fermionic interaction formula.
    #[error("singular coupling: gamma_F = {gamma} equals 2*dx = {pole}")]
    Singularity { gamma: f64, pole: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("potential table does not cover x = {x}")]
    Range { x: f64 },

    #[error("numerical failure at bond {bond}: {reason}")]
    Numerical { bond: usize, reason: String },

    #[error("contract violation: {0}")]
    Contract(String),

    /// Imaginary-time evolution ran out of steps; the trace so far is kept.
    #[error("no convergence after {steps} steps")]
    Convergence { steps: usize, trace: Vec<TraceRow> },
}
