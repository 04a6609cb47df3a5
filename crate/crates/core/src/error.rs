use thiserror::Error;

/// Errors raised by parsing, grammar transformations and decision procedures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("undeclared label `{0}`")]
    UndeclaredLabel(String),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error("grammar is not regular: {0}")]
    NotRegular(String),
    #[error("grammar is not normalized: {0}")]
    NotNormalized(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("periodic variable {0} has period 1")]
    PeriodOne(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("expected a {expected}, got {got}")]
    WrongShape { expected: &'static str, got: String },
    #[error("profile closure exceeded the cap of {0} elements")]
    CapExceeded(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
