//! Crate-wide error type.

/// Errors reported by grid construction, solvers and harnesses.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field defined on a different grid (expected {expected} points, got {got})")]
    GridMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("density fell below the floor at t = {t}: min rho = {min_density:.3e} < {floor:.3e}")]
    VacuumFloor {
        t: f64,
        min_density: f64,
        floor: f64,
    },

    #[error("solver breakdown at t = {t}: {cause}")]
    Breakdown { t: f64, cause: String },

    #[error("fit rejected: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
