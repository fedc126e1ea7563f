use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input file, schema, configuration or argument.
    Input,
    /// The analysis cannot proceed on this data (empty front, missing group, ...).
    Degenerate,
    Other,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing required columns: {}", .0.join(", "))]
    Schema(Vec<String>),
    #[error("format error: {0}")]
    Format(String),
    #[error("invalid cohort policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid feature schema: {0}")]
    InvalidSchema(String),
    #[error("cohort filter removed every record")]
    EmptyCohort,
    #[error("record has group level {0:?} which is not one of the configured group levels")]
    UnknownGroup(String),
    #[error(
        "cannot stratify: cell (group {group}, label {label}) has {count} row(s), need at least 2"
    )]
    Stratification {
        group: usize,
        label: u8,
        count: usize,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("arity error: {0}")]
    Arity(String),
    #[error("group {0} has no samples")]
    EmptyGroup(usize),
    #[error("degenerate groups: {0}")]
    DegenerateGroups(String),
    #[error("labels contain a single class; both 0 and 1 are required")]
    DegenerateLabels,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no point has a defined value for {0}; the front is empty")]
    EmptyFront(String),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("variable {0:?} is not numeric")]
    NonNumeric(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. }
            | Error::Schema(_)
            | Error::Format(_)
            | Error::InvalidPolicy(_)
            | Error::InvalidSchema(_)
            | Error::UnknownGroup(_)
            | Error::InvalidArgument(_)
            | Error::UnknownVariable(_)
            | Error::NonNumeric(_)
            | Error::Json(_)
            | Error::Csv(_) => ErrorClass::Input,
            Error::EmptyCohort
            | Error::Stratification { .. }
            | Error::EmptyGroup(_)
            | Error::DegenerateGroups(_)
            | Error::DegenerateLabels
            | Error::EmptyFront(_) => ErrorClass::Degenerate,
            Error::Dimension(_) | Error::Arity(_) => ErrorClass::Other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
