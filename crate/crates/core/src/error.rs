use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown identifier `{name}` at {line}:{column}")]
    UnknownIdentifier { name: String, line: usize, column: usize },

    #[error("malformed rational at {line}:{column}: {message}")]
    MalformedRational {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("domain exhausted: no admissible sample point among {attempts} attempts")]
    DomainExhausted { attempts: usize },

    #[error("gate violated: {}", .0.join("; "))]
    Gate(Vec<String>),

    #[error("nondegeneracy violated: {0}")]
    Nondegeneracy(String),

    #[error("not invertible in closed form: {0}")]
    NonInvertible(String),

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("{file}:{line}: {message}")]
    File { file: String, line: usize, message: String },

    #[error("internal audit failure: {0}")]
    Audit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn nondegenerate(msg: impl Into<String>) -> Self {
        Error::Nondegeneracy(msg.into())
    }

    /// Parse-family errors, as opposed to domain, gate and verification failures.
    pub fn is_parse(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownIdentifier { .. }
                | Error::MalformedRational { .. }
                | Error::File { .. }
        )
    }
}
