use thiserror::Error;

/// Errors raised by evaluators and checkers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum QError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} did not converge within {terms} terms")]
    NonConvergence { what: String, terms: usize },

    #[error(
        "series argument outside the unit disk (|z| = {modulus}) and no terminating parameter"
    )]
    OutOfDomain { modulus: f64 },

    #[error("pole: {0}")]
    Pole(String),

    #[error("singular coefficient: {0}")]
    Singular(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("continued fraction indeterminate at depth {depth}")]
    Indeterminate { depth: usize },
}
