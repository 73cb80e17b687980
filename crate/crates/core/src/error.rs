//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric within tolerance (max skew {skew:.3e})")]
    Asymmetric { skew: f64 },

    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),

    #[error("unsupported pencil: {0}")]
    UnsupportedPencil(String),

    #[error("{0} is not an eigenvalue within tolerance")]
    NotAnEigenvalue(f64),

    #[error("crossing counts did not stabilize: {0}")]
    InconclusiveCrossing(String),

    #[error("no candidate: the Hessian at lambda* has trivial kernel")]
    NoCandidate,

    #[error("nondegenerate Hessian at lambda*: reduction is unnecessary")]
    Nondegenerate,

    #[error("complement Newton failed to converge after {iterations} iterations (residual {residual:.3e})")]
    ReductionFailed {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("outside validity neighborhood: {0}")]
    OutsideValidity(String),

    #[error("kernel dimension {0} exceeds the classification limit of 3")]
    UnsupportedDimension(usize),

    #[error("family is not Z2-equivariant (|F(u) - F(-u)| = {0:.3e})")]
    NotEquivariant(f64),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
