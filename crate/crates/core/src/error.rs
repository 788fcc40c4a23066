use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An index (node, qubit, ancilla slot) is outside its valid range.
    #[error("index {index} out of range for {what} of size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    /// A move was requested for a node whose guard is false.
    #[error("node {node} is not privileged in configuration {config}")]
    NotPrivileged { node: usize, config: String },

    /// A size exceeds what the exhaustive or dense algorithms support.
    #[error("{what} = {value} exceeds the supported bound {max}")]
    Capacity {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A circuit could not be assembled (reused ancilla, empty schedule, ...).
    #[error("circuit construction: {0}")]
    Construction(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl Error {
    pub(crate) fn index(what: &'static str, index: usize, size: usize) -> Self {
        Error::IndexOutOfRange { what, index, size }
    }

    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            line,
            reason: reason.into(),
        }
    }
}
