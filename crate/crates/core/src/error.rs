use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid distribution: {0}")]
    InvalidDist(String),

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("register groups overlap on `{0}`")]
    OverlappingGroups(String),

    #[error("capacity iteration did not converge after {iterations} iterations (bracket [{lower}, {upper}])")]
    NotConverged { lower: f64, upper: f64, iterations: usize },

    #[error("enumeration needs {cells} cells, above the cap of {cap}")]
    CellCap { cells: u128, cap: u64 },

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("derandomization search failed after {restarts} restarts: {reason}")]
    SearchFailed { restarts: usize, reason: String },

    #[error("{path}: {message} (line {line}, column {column})")]
    Parse {
        path: String,
        message: String,
        line: usize,
        column: usize,
    },
}

impl Error {
    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        Error::InvalidProtocol(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
