use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    Field(String),
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("operands act on {0} and {1} qubits")]
    SizeMismatch(usize, usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0} exceeds the size guard")]
    SizeGuard(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
