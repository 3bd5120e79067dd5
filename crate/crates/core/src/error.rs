use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("coincident centers")]
    CoincidentCenters,
    #[error("degenerate input involving balls {balls:?}: {reason}")]
    DegenerateInput { balls: Vec<usize>, reason: String },
    #[error("degenerate tangency on ball {ball}: {reason}")]
    DegenerateTangency { ball: usize, reason: String },
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown atom id {0}")]
    UnknownAtomId(usize),
    #[error("grid too large: {points} points exceeds budget {budget}")]
    GridTooLarge { points: u64, budget: u64 },
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}, columns {columns}: malformed record: {reason}")]
    MalformedRecord { line: usize, columns: String, reason: String },
    #[error("no atom records accepted")]
    EmptyStructure,
    #[error("file format error at {location}: {reason}")]
    FileFormat { location: String, reason: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("structure {0} not found")]
    NotFound(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(IoError::Io(e))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
