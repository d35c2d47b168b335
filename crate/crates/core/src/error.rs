use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("unbounded region: {0}")]
    Region(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("semantic error in {record}: {msg}")]
    Semantic { record: String, msg: String },
    #[error("oracle error: {0}")]
    Oracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
