use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid dimension vector: {0}")]
    InvalidDims(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("state is not pure (second eigenvalue {0:.3e})")]
    MixedState(f64),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("missing separability witness")]
    MissingWitness,

    #[error("invalid LOCC1 tree: {0}")]
    InvalidTree(String),

    #[error("invalid party selection: {0}")]
    InvalidPartition(String),

    #[error("random generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: u32, reason: String },

    #[error("invalid SDP problem: {0}")]
    InvalidProblem(String),

    #[error("affine constraints are inconsistent (least-squares residual {0:.3e})")]
    InconsistentConstraints(f64),

    #[error("SDP did not converge: status {status}, cone residual {cone_residual:.3e}")]
    NotConverged { status: String, cone_residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
