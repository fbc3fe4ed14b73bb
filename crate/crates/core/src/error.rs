use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input document. `index` is the offending feature, when known.
    #[error("{}", parse_message(*.index, .message))]
    Parse { index: Option<usize>, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: String },

    /// An operation that is illegal in the record's current lifecycle state.
    #[error("invalid state: {0}")]
    State(String),

    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("store load error at {location}: {message}")]
    Load { location: String, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_message(index: Option<usize>, message: &str) -> String {
    match index {
        Some(i) => format!("parse error in feature {i}: {message}"),
        None => format!("parse error: {message}"),
    }
}

impl Error {
    pub(crate) fn not_found(kind: &'static str, id: impl ToString) -> Self {
        Error::NotFound {
            kind,
            id: id.to_string(),
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
