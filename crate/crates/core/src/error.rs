use thiserror::Error;

/// Errors produced anywhere in the checker.
///
/// Budget exhaustion is deliberately its own variant: a search that ran out
/// of room has no verdict, which is different from a verdict of `false`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("unsupported fragment: {0}")]
    Unsupported(String),

    #[error("zero-probability condition: {0}")]
    Condition(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    /// Stable machine-readable code used in CLI reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Argument(_) => "argument",
            Error::Syntax { .. } => "syntax",
            Error::Arity(_) => "arity",
            Error::Budget(_) => "budget",
            Error::Unsupported(_) => "unsupported-fragment",
            Error::Condition(_) => "zero-condition",
            Error::Precondition(_) => "precondition",
            Error::Model(_) => "model",
            Error::Config(_) => "config",
            Error::Format(_) => "format",
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
