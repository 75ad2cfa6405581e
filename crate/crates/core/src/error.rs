use std::path::PathBuf;

/// Everything that can go wrong in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),

    #[error("walk not symmetric: {0:?} has no sign/permutation invariance")]
    NotSymmetric(crate::walk::WalkKind),

    #[error("{path}: bad magic, expected KACVEC01")]
    BadMagic { path: PathBuf },

    #[error("{path}: payload short (expected {expected} bytes, found {found})")]
    PayloadShort {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("{path}: trailing bytes after payload ({extra} extra)")]
    PayloadLong { path: PathBuf, extra: u64 },

    #[error("{path}:{line}: non-numeric field {field:?}")]
    NonNumeric {
        path: PathBuf,
        line: usize,
        field: String,
    },

    #[error("{path}:{line}: ragged row ({found} fields, expected {expected})")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: non-finite value in point set")]
    NonFinite { path: PathBuf },

    #[error("{path}: refusing to write an empty point set as CSV")]
    EmptyCsv { path: PathBuf },

    #[error("{path}: already exists (pass overwrite to replace it)")]
    Exists { path: PathBuf },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable numeric code per variant, used by the CLI when reporting.
    pub fn code(&self) -> u32 {
        match self {
            Error::Dimension(_) => 10,
            Error::Parameter(_) => 11,
            Error::CapExceeded(_) => 12,
            Error::NotSymmetric(_) => 13,
            Error::BadMagic { .. } => 20,
            Error::PayloadShort { .. } => 21,
            Error::PayloadLong { .. } => 22,
            Error::NonNumeric { .. } => 23,
            Error::RaggedRow { .. } => 24,
            Error::NonFinite { .. } => 25,
            Error::EmptyCsv { .. } => 26,
            Error::Exists { .. } => 27,
            Error::Io { .. } => 30,
            Error::Json(_) => 31,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
