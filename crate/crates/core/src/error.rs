use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("dataset integrity: {0}")]
    Integrity(String),
    #[error("capability exceeded: {0}")]
    Capability(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("cannot place graph {graph_id} on the trap lattice: {reason}")]
    Placement { graph_id: usize, reason: String },
    #[error("graph generation failed: {0}")]
    Generation(String),
    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("kernel matrix is singular; use the regularized geometric difference")]
    Singular,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
