use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {dim} exceeds the configured cap {cap}")]
    Capacity { dim: usize, cap: usize },

    #[error("{what} index {index} out of bounds (len {len})")]
    OutOfBounds {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("cutoff sigma = {sigma} outside the grid range ({kmin}, {kmax}]")]
    CutoffOutOfRange { sigma: f64, kmin: f64, kmax: f64 },

    #[error("projector is not idempotent: max |P^2 - P| = {defect:e}")]
    NotIdempotent { defect: f64 },

    #[error("singular or ill-conditioned system at z = {z} (condition estimate {cond:e})")]
    Singular { z: Complex64, cond: f64 },

    #[error("{method} did not converge after {iterations} iterations")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
    },

    #[error("resonance branch lost near g = {g} (best overlap {overlap:.3})")]
    BranchLost { g: f64, overlap: f64 },

    #[error("Krylov propagation failed: {0}")]
    Krylov(String),

    #[error("wedge condition violated at z = {z}")]
    WedgeViolation { z: Complex64 },

    #[error("degenerate regression: {0}")]
    RankDeficient(String),

    #[error("dense eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
