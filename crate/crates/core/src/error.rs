use std::fmt;

use uuid::Uuid;

/// A single problem found while checking a document, addressed by a
/// JSON-pointer-style path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl Issue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "/" } else { &self.path };
        write!(f, "{}: {}", path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("context error: {0}")]
    Context(String),

    #[error("insufficient evaluation points: prime {prime} must exceed degree bound {bound}")]
    InsufficientEvaluationPoints { prime: u64, bound: usize },

    #[error("unsupported type: {0}")]
    UnsupportedType(String),

    #[error("dangling reference: {0}")]
    DanglingReference(Uuid),

    #[error("cyclic reference through {0}")]
    CyclicReference(Uuid),

    #[error("context not preloaded: {0}")]
    ContextNotPreloaded(String),

    #[error("decode error at {path}: {message}")]
    Decode { path: String, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid document: {}", join_issues(.0))]
    Invalid(Vec<Issue>),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("remote failure: {0}")]
    Remote(String),

    #[error("parallel map failed at item {index}: {message}")]
    MapItem { index: usize, message: String },

    #[error("pool closed")]
    PoolClosed,

    #[error("prime generation exhausted below {0}")]
    PrimesExhausted(u64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_issues(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn decode(path: &str, message: impl Into<String>) -> Self {
        Error::Decode {
            path: if path.is_empty() { "/".into() } else { path.into() },
            message: message.into(),
        }
    }

    /// True for failures that originate in the worker pool rather than the input.
    pub fn is_distributed(&self) -> bool {
        matches!(
            self,
            Error::Transport(_) | Error::Remote(_) | Error::MapItem { .. } | Error::PoolClosed
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
