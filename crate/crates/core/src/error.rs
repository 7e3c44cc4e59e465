use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable index {index} out of range 1..={arity}")]
    IndexOutOfRange { index: usize, arity: usize },

    #[error("arity mismatch in {what}: expected {expected}, found {found}")]
    ArityMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("unknown monad `{0}` (builtin monads: identity, point, option)")]
    UnknownMonad(String),

    #[error("unknown signature `{0}`")]
    UnknownSignature(String),

    #[error("{what} requires a single base monad, got `{left}` and `{right}`")]
    MonadMismatch {
        what: &'static str,
        left: String,
        right: String,
    },

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("unknown sort `{0}`")]
    UnknownSort(String),

    #[error("sort mismatch: expected {expected}, found {found}")]
    SortMismatch { expected: String, found: String },

    #[error("unbound name `{0}`")]
    UnboundName(String),

    #[error("invalid term for this monad: {0}")]
    BadPayload(String),

    #[error("component {component} is not the matching variable, so the morphism is not a section")]
    NotASection { component: usize },

    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    #[error("out of bounds: {0}")]
    OutOfBounds(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("terms of module `{0}` have no concrete syntax")]
    UnsupportedSyntax(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }
}
