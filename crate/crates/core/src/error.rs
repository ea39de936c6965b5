use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for {len} variables")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("linear map is not symplectic")]
    NotSymplectic,

    /// A documented precondition of a constructor was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The two quadratic structures differ only in sign: no real isomorphism exists.
    #[error("no isomorphism: {0}")]
    Obstruction(String),

    #[error("unsupported structure pair: {0}")]
    UnsupportedPair(String),

    #[error("map does not pull the Liouville form back to itself")]
    NotAnAutomorphism,

    /// The classification of automorphisms was contradicted at a concrete instance.
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
