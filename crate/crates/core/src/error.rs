use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spin sector: {0}")]
    InvalidSector(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge")]
    EigenNoConvergence,

    /// Nondegenerate perturbation theory breaks down: some coupled pair of
    /// unperturbed eigenphases is (numerically) degenerate.
    #[error("degenerate unperturbed eigenphases between levels {m} and {m_prime} (|e^(ix) - 1| = {gap:.3e})")]
    Degenerate { m: usize, m_prime: usize, gap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
