use thiserror::Error;

/// Errors raised by parsing, rule derivation, rewriting and the command surface.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown connective `{token}` at {line}:{column}")]
    UnknownConnective {
        token: String,
        line: usize,
        column: usize,
    },
    #[error("connective `{0}` is not declared")]
    UndeclaredConnective(String),
    #[error("arity mismatch for `{connective}`: {message}")]
    ArityMismatch { connective: String, message: String },
    #[error("duplicate connective `{0}`")]
    DuplicateConnective(String),
    #[error("duplicate rule name `{0}`")]
    DuplicateRule(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("hypothesis label {0} is not discharged by any enclosing rule application")]
    UndeclaredLabel(u32),
    #[error("rule `{0}` is not a type-1 introduction rule")]
    NotType1(String),
    #[error("rule `{0}` is not a type-2 elimination rule")]
    NotType2(String),
    #[error("invalid node path {0}")]
    InvalidPath(String),
    #[error("cannot instantiate `{rule}`: {message}")]
    Mismatch { rule: String, message: String },
    #[error("no {expected} at {site}")]
    NotARedex { expected: &'static str, site: String },
    #[error("redex at {site} cannot be levelled: {reason}")]
    Irreducible { site: String, reason: String },
    #[error("deduction is not valid in calculus `{calculus}`: {message}")]
    InvalidDeduction { calculus: String, message: String },
    #[error("probe uses vocabulary outside the base calculus: {0}")]
    VocabularyViolation(String),
    #[error("base calculus rule `{0}` is missing from the extension")]
    NotAnExtension(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
