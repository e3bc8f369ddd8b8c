use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("singular design matrix: {0}")]
    Singular(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("XML parse error at line {line}, column {column}: {message}")]
    Xml {
        line: u32,
        column: u32,
        message: String,
    },

    #[error("object #{object_index}: missing field `{field}`")]
    MissingField { object_index: usize, field: String },

    #[error("object #{object_index}: invalid geometry ({detail})")]
    Geometry { object_index: usize, detail: String },

    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("invalid value: {0}")]
    Value(String),

    #[error("box index {index} out of range for screenshot `{screenshot_id}` with {len} boxes")]
    Index {
        screenshot_id: String,
        index: usize,
        len: usize,
    },

    #[error("unknown screenshot `{0}`")]
    Reference(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("insufficient tail: {0}")]
    InsufficientTail(String),

    #[error("bootstrap unstable: {discarded} of {requested} replicates failed to re-fit")]
    Unstable { discarded: usize, requested: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input files, paths or arguments rather
    /// than by a failed computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::Degenerate(_)
                | Error::Singular(_)
                | Error::Undefined(_)
                | Error::InsufficientTail(_)
                | Error::Unstable { .. }
        )
    }
}
