use thiserror::Error;

/// Errors raised by group construction, cocycle arithmetic and the spectral routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("{what} exceeds cap: {actual} > {limit}")]
    CapExceeded {
        what: &'static str,
        limit: u128,
        actual: u128,
    },

    #[error("element is not a member of the group: {0}")]
    NotMember(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("group is not abelian: elements {0} and {1} do not commute")]
    NotAbelian(usize, usize),

    #[error("subset is not closed under multiplication: {0} * {1} leaves the subset")]
    NotClosed(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cocycle is not invariant under the linear action: {0}")]
    NotInvariant(String),

    #[error("input is not a 2-cocycle: identity fails at ({0}, {1}, {2})")]
    NotACocycle(usize, usize, usize),

    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn cap(what: &'static str, limit: impl Into<u128>, actual: impl Into<u128>) -> Self {
        Error::CapExceeded {
            what,
            limit: limit.into(),
            actual: actual.into(),
        }
    }

    /// True for errors caused by user input rather than I/O.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
