use thiserror::Error;

use crate::sdpsolve::SolveStatus;

/// Errors raised by model construction, relaxation assembly and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degree {degree} exceeds bound {bound}")]
    DegreeOverflow { degree: u32, bound: u32 },

    #[error("moment vector is missing entry {0}")]
    IncompleteMoments(String),

    #[error("empty Omega: the LMI describing the index set is infeasible")]
    EmptyOmega,

    #[error("Omega not compact: the inner supremum is unbounded")]
    OmegaNotCompact,

    #[error("solver failed with status {0:?}")]
    Solver(SolveStatus),

    #[error("problem file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
