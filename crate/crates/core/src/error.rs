use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A corpus line could not be parsed or violates a record invariant.
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("duplicate paper id `{0}`")]
    DuplicateId(String),

    #[error("unknown author `{0}`")]
    UnknownAuthor(String),

    #[error("series too short: career length {len} years, need at least {needed}")]
    TooShort { len: usize, needed: usize },

    #[error("author `{author}` is not eligible: observed span {span} < {min_span} years")]
    Ineligible {
        author: String,
        span: usize,
        min_span: usize,
    },

    #[error("too few authors: have {have}, need at least {need}")]
    TooFewAuthors { have: usize, need: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
