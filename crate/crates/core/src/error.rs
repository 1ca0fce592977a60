use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("unknown internal label id {0}")]
    UnknownLabel(usize),

    #[error("closed-form expression requires balanced beam splitters; use the numeric path")]
    Unbalanced,

    #[error("numerical instability: {0}")]
    Numerical(String),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
